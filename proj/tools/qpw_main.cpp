#include <vector>
#include <string>

#include "qpw/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return qpw::run_cli(args);
}
