#include "chainrec/cli_app.h"

int main(int argc, char** argv) { return chainrec::run_cli(argc, argv); }
