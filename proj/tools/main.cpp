#include "roadsentry/cli.hpp"

int main(int argc, char** argv) {
  return roadsentry::cli::dispatch(argc, argv);
}
