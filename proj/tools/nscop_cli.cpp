#include "nscop/cli.hpp"

int main(int argc, char** argv) { return nscop::run(argc, argv); }
