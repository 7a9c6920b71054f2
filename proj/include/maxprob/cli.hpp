#pragma once

// Command-line front end. dispatch() never throws: it returns 0 on success,
// 1 on a domain error (with {"error": code, "detail": text} on `err`) and 2
// on a usage error.

#include <iosfwd>
#include <string>
#include <vector>

namespace maxprob {

// args excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace maxprob
