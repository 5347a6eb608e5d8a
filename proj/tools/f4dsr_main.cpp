#include "f4d/cli.hpp"

int main(int argc, char** argv) {
    return f4d::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
