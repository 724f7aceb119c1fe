// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "masc/cli.hpp"

int main(int argc, char** argv) { return masc::cli::run(argc, argv, std::cout, std::cerr); }
