#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mcbf {

/// kControl carries the one-scalar "my subproblem is infeasible" flag that
/// triggers a step backtrack; it is not part of the per-iteration load.
enum class MessageTag { kDualLambda, kDualMu, kLocalCopy, kRankBit, kGrPower, kControl };

const char* ToString(MessageTag tag);

/// Receiver id for a value published once to every other BS.
constexpr int kBroadcast = -1;

struct ScalarMessage {
  int sender = 0;
  int receiver = 0;  ///< BS index or kBroadcast
  MessageTag tag = MessageTag::kDualLambda;
  std::vector<double> values;
};

struct MessageRecord {
  int round = 0;
  int sender = 0;
  int receiver = 0;
  MessageTag tag = MessageTag::kDualLambda;
  int count = 0;
};

class MessageLog {
 public:
  void Append(const MessageRecord& record);
  const std::vector<MessageRecord>& records() const { return records_; }
  /// Scalars logged in `round`, optionally restricted to some tags.
  long long RoundTotal(int round, const std::vector<MessageTag>& tags = {}) const;
  long long Total(const std::vector<MessageTag>& tags = {}) const;
  /// Tampering hook for tests and offline replay.
  std::vector<MessageRecord>& mutable_records() { return records_; }

  /// Columns: round,sender,receiver,tag,count. Broadcast receivers are "*".
  void WriteCsv(std::ostream& out) const;

 private:
  std::vector<MessageRecord> records_;
};

/// Synchronous scalar bus between B agents. Each RunRound is one barrier:
/// every message of the plan is delivered and logged under a new round
/// number, and the per-BS inboxes are returned in plan order.
class Backhaul {
 public:
  explicit Backhaul(int num_bs) : num_bs_(num_bs) {}

  /// Throws ConfigError if a message names an unknown BS.
  std::vector<std::vector<ScalarMessage>> RunRound(const std::vector<ScalarMessage>& plan);

  int num_bs() const { return num_bs_; }
  int rounds() const { return next_round_; }
  int last_round() const { return next_round_ - 1; }
  const MessageLog& log() const { return log_; }

 private:
  int num_bs_;
  int next_round_ = 0;
  MessageLog log_;
};

/// 2 A U (B - 1) B real scalars to gather all channels centrally.
long long CentralizedSignalingLoad(int B, int U, int A);

/// 2 B (B - 1) (U / B) scalars per distributed iteration. Throws
/// ConfigError when U is not divisible by B.
long long PerIterationSignalingLoad(int B, int U);

/// True when the scalars logged in `round` (restricted to `tags` if given)
/// equal `expected`.
bool VerifyExchangeCount(const MessageLog& log, int round, long long expected,
                         const std::vector<MessageTag>& tags = {});

}  // namespace mcbf
