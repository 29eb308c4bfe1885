#include "mdg/error.hpp"

namespace mdg::detail {

void throw_invalid(const std::string& what) { throw InvalidArgument(what); }

}  // namespace mdg::detail
