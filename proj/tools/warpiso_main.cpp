#include "warpiso/cli.hpp"

int main(int argc, char** argv) {
  return warpiso::cli::run(argc, argv);
}
