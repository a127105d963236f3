#include "hopdyn/cli.hpp"

int main(int argc, char** argv)
{
    return hopdyn::cli_main(argc, argv);
}
