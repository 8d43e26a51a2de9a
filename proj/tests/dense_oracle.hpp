#pragma once

#include <map>
#include <string>
#include <vector>

#include "wignerbox/protocol.hpp"

namespace wignerbox::oracle {

/// Brute-force check of the sparse engine: the full product space as one
/// dense double vector, every stage as an explicit matrix (identity on all
/// unlisted columns), evolved by plain matrix-vector products. Shares only
/// the schedule data with the engine, none of its state machinery.
class DenseOracle {
  public:
    explicit DenseOracle(const Schedule &schedule);

    size_t dim() const { return dim_; }

    /// State after all stages completing at or before t, from the initial
    /// product of init tokens.
    std::vector<double> state_at(TimeStamp t) const;
    std::vector<double> final_state() const;

    size_t index_of(const std::map<std::string, std::string> &labels) const;
    const std::string &token_at(size_t index, const std::string &reg) const;

  private:
    struct Reg {
        std::string name;
        std::vector<std::string> tokens;
        size_t stride = 1;
        size_t init = 0;
    };
    struct Stage {
        TimeStamp done;
        // Sparse columns of the full-space matrix; identity columns omitted.
        std::map<size_t, std::vector<std::pair<size_t, double>>> columns;
    };

    const Reg &reg(const std::string &name) const;
    size_t token_of(size_t index, const Reg &r) const { return (index / r.stride) % r.tokens.size(); }
    size_t with_token(size_t index, const Reg &r, size_t tok) const {
        return index + (tok - token_of(index, r)) * r.stride;
    }

    void add_prepare(TimeStamp at, const NamedState &state, const std::string &reg);
    void add_condprepare(TimeStamp at, const ConditionalPrepare &c);
    void add_table(TimeStamp done, const InferenceTable &table);
    void add_measure(TimeStamp at, const MeasureStep &m, const NamedBasis &basis);

    std::vector<Reg> regs_;
    size_t dim_ = 1;
    std::vector<Stage> stages_;
};

} // namespace wignerbox::oracle
