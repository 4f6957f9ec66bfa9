#include "probeforge/cli/cli.hpp"

int main(int argc, char** argv) {
    return probeforge::cli::run(argc, argv);
}
