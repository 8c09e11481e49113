#include <vector>

#include "alphamine/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return alphamine::run_cli(args);
}
