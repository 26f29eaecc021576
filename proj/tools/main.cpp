#include "sawlab/cli.hpp"

int main(int argc, char** argv) { return sawlab::run(argc, argv); }
