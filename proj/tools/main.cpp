#include "perfdiag/cli.hpp"

int main(int argc, char** argv) {
    return perfdiag::cli_run(argc, argv);
}
