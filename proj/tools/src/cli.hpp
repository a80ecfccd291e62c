#pragma once

#include <iosfwd>

namespace conescoop {

int cli_main(int argc, char** argv);
// Same, with explicit streams; used by tests.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace conescoop
