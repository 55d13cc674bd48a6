#include "pipenet/cli.h"

#include <iostream>

int main(int argc, char** argv)
{
    return pipenet::cli_main(argc, argv, std::cout, std::cerr);
}
