// Copyright 2026 The AQCF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <cstdio>

#include "aqcf/qsim.hpp"

// Every gate applied anywhere in the suite is norm-audited.
int main(int argc, char** argv) {
    aqcf::qsim::NormAudit::enable(true);
    doctest::Context context(argc, argv);
    const int status = context.run();
    if (context.shouldExit()) return status;
    const double worst = aqcf::qsim::NormAudit::worst_deviation();
    std::printf("norm audit: %ld gate applications, worst |<psi|psi> - 1| = %.3e\n",
                aqcf::qsim::NormAudit::checks(), worst);
    if (worst >= 1e-10) {
        std::printf("norm audit FAILED\n");
        return 1;
    }
    return status;
}
