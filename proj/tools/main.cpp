#include "packcool/cli_commands.hpp"

int main(int argc, char** argv) { return packcool::run_cli(argc, argv); }
