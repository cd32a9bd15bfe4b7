#include "requery/pipeline.hpp"

int main(int argc, char** argv) { return requery::cli_main(argc, argv); }
