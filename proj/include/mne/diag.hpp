#pragma once

#include <functional>
#include <string>

namespace mne {

using WarnHandler = std::function<void(const std::string&)>;

/// Install a sink for non-fatal diagnostics (asymmetric matrix symmetrized,
/// ridge parameter inflated after a factorization failure, ...). The default
/// sink writes to stderr. Passing an empty function restores the default.
void set_warning_handler(WarnHandler handler);

void warn(const std::string& message);

}  // namespace mne
