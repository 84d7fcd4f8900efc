#pragma once

#include <iosfwd>
#include <string>

#include "scyfi/search.hpp"

namespace scyfi {

// One CycleObject per line:
// {"order":k,"points":[[..]],"codes":[[..]],"eigenvalues":[[re,im],..],
//  "stability":"stable|unstable|marginal","max_abs_eig":x}
std::string cycle_to_json(const CycleObject& c);
CycleObject cycle_from_json(const std::string& line);

void write_library_jsonl(const CycleLibrary& lib, std::ostream& out);
void write_library_jsonl(const CycleLibrary& lib, const std::string& path);
CycleLibrary read_library_jsonl(const std::string& path);

}  // namespace scyfi
