#include "faithfulrag/cli.hpp"

int main(int argc, char** argv) { return faithfulrag::run_cli(argc, argv); }
