// CLI stub; subcommands land with the harness module.
#include <cstdio>

int main() {
    std::fprintf(stderr, "fsvd: no subcommands wired up yet\n");
    return 2;
}
