#pragma once

#include <iosfwd>

namespace khypo {

// Exit codes: 0 all assertions pass, 1 assertion failure, 2 config/usage error, 3 numerical error.
int cli_main(int argc, char** argv);
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace khypo
