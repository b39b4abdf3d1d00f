#include "bmp/cli.hpp"

int main(int argc, char** argv) { return bmp::run(argc, argv); }
