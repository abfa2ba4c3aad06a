#include <nlfkpp/cli.hpp>

int main(int argc, char** argv) { return nlfkpp::cli_main(argc, argv); }
