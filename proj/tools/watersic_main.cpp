// SPDX-License-Identifier: Apache-2.0
#include "watersic/cliapp.hpp"

int main(int argc, char** argv) { return watersic::run_cli(argc, argv); }
