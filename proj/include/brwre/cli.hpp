#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace brwre::cli {

// Exit codes: 0 success, 1 a verification check failed, 2 configuration or
// usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

}  // namespace brwre::cli
