#include "bodyfit/cli.hpp"

int main(int argc, char** argv) { return bodyfit::cli_main(std::vector<std::string>(argv, argv + argc)); }
