#ifndef COORDBEAM_FIXTURES_H_
#define COORDBEAM_FIXTURES_H_

#include <string>

#include "coordbeam/centralized.h"
#include "coordbeam/model.h"
#include "coordbeam/scenario.h"

namespace coordbeam {

/// JSON instance fixtures: complex entries are [re, im] pairs, channels are
/// nested [user][bs][antenna] arrays. Used by golden tests and the CLI.
ChannelSet load_channel_set(const std::string& path);
void save_channel_set(const ChannelSet& ch, const std::string& path);

std::string channel_set_to_json(const ChannelSet& ch);
ChannelSet channel_set_from_json(const std::string& text);

/// Drop regression records.
std::string drop_to_json(const DropScenario& drop);
DropScenario drop_from_json(const std::string& text);

/// Solve outcome including the iteration trace, for regression diffing.
std::string outcome_to_json(const SolveOutcome& out);

}  // namespace coordbeam

#endif  // COORDBEAM_FIXTURES_H_
