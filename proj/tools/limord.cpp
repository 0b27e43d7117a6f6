#include "limord/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    const limord::RunResult r = limord::run(std::vector<std::string>(argv + 1, argv + argc));
    std::cout << r.out;
    std::cerr << r.err;
    return r.exit_code;
}
