#include "coplan.h"

int main(int argc, char** argv) {
  return coplan_run_command(argc - 1, argv + 1);
}
