#include "eventum/cli.hpp"

int main(int argc, char** argv) { return eventum::run_main(argc, argv); }
