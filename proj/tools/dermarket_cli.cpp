// Command-line entry point; subcommands are implemented in the library.
#include <cstdio>

int main() {
  std::printf("dermarket: cli not wired yet\n");
  return 2;
}
