#include <peeltrace/cli.hpp>

int main(int argc, char **argv)
{
    return peeltrace::cli::run(argc, argv);
}
