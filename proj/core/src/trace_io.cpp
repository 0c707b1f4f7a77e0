#include <ostream>

#include "json.hpp"

#include "cgmh/sampler.hpp"

namespace cgmh {

void write_trace_jsonl(std::ostream& out, const ChainTrace& trace, const Vocabulary& vocab) {
  for (std::size_t t = 0; t < trace.states.size(); ++t) {
    nlohmann::ordered_json rec;
    rec["step"] = t;
    rec["sentence"] = detokenize(trace.states[t], vocab);
    rec["log_score"] = trace.log_scores[t];
    if (t == 0) {
      rec["op"] = nullptr;
      rec["A"] = nullptr;
      rec["accepted"] = nullptr;
    } else {
      const auto& r = trace.records[t - 1];
      rec["op"] = op_name(r.kind);
      rec["A"] = r.acceptance;
      rec["accepted"] = r.accepted;
      if (r.floored) rec["floored"] = true;
    }
    out << rec.dump() << '\n';
  }
}

}  // namespace cgmh
