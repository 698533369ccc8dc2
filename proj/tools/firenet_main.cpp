#include <string>
#include <vector>

#include "firenet/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return firenet::run_command(args);
}
