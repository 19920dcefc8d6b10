#include "loadcast/cli.hpp"

int main(int argc, char** argv) { return loadcast::cli::dispatch(argc, argv); }
