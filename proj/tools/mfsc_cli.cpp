#include "mfsc/harness.hpp"

int main(int argc, char** argv) { return mfsc::cli_main(argc, argv); }
