#include "accessplan/cli.hpp"

int main(int argc, char** argv)
{
  return accessplan::run_cli(argc, argv);
}
