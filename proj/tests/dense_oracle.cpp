#include "dense_oracle.hpp"

#include <stdexcept>
#include <variant>

namespace wignerbox::oracle {

namespace {

// Dense vector of an expression over a register group, indexed by the
// group-local mixed-radix label.
std::vector<double> expr_vector(const LinearExpr &expr,
                                const std::vector<const std::vector<std::string> *> &alphabets) {
    size_t local_dim = 1;
    for (const auto *a : alphabets) {
        local_dim *= a->size();
    }
    std::vector<size_t> strides(alphabets.size(), 1);
    for (size_t i = alphabets.size(); i-- > 1;) {
        strides[i - 1] = strides[i] * alphabets[i]->size();
    }
    std::vector<double> v(local_dim, 0.0);
    for (const auto &term : expr) {
        size_t idx = 0;
        for (size_t i = 0; i < alphabets.size(); ++i) {
            const auto &alpha = *alphabets[i];
            size_t tok = 0;
            while (alpha[tok] != term.tokens[i]) {
                ++tok;
            }
            idx += tok * strides[i];
        }
        v[idx] += term.coeff.to_double();
    }
    return v;
}

} // namespace

DenseOracle::DenseOracle(const Schedule &schedule) {
    for (const auto &decl : schedule.registers) {
        Reg r;
        r.name = decl.name;
        r.tokens = decl.tokens;
        size_t init = 0;
        while (decl.tokens[init] != decl.init) {
            ++init;
        }
        r.init = init;
        regs_.push_back(std::move(r));
    }
    for (size_t i = regs_.size(); i-- > 0;) {
        regs_[i].stride = dim_;
        dim_ *= regs_[i].tokens.size();
    }

    for (const auto &step : schedule.steps) {
        if (const auto *p = std::get_if<PrepareRandom>(&step.action)) {
            add_prepare(step.at, *schedule.find_state(p->state), p->reg);
        } else if (const auto *c = std::get_if<ConditionalPrepare>(&step.action)) {
            add_condprepare(step.at, *c);
        } else if (const auto *m = std::get_if<MeasureStep>(&step.action)) {
            add_measure(step.at, *m, *schedule.find_basis(m->basis));
        } else if (const auto *inf = std::get_if<InferStep>(&step.action)) {
            for (const auto &stage : inf->stages) {
                add_table(stage.done, stage.table);
            }
        } else if (const auto *acc = std::get_if<AccessMemoryStep>(&step.action)) {
            add_table(step.at, acc->table);
        }
    }
}

const DenseOracle::Reg &DenseOracle::reg(const std::string &name) const {
    for (const auto &r : regs_) {
        if (r.name == name) {
            return r;
        }
    }
    throw std::out_of_range("oracle: no register " + name);
}

void DenseOracle::add_prepare(TimeStamp at, const NamedState &state, const std::string &reg_name) {
    const Reg &r = reg(reg_name);
    Stage stage;
    stage.done = at;
    for (size_t j = 0; j < dim_; ++j) {
        if (token_of(j, r) != r.init) {
            continue;
        }
        std::vector<std::pair<size_t, double>> col;
        for (const auto &term : state.expr) {
            size_t tok = 0;
            while (r.tokens[tok] != term.tokens[0]) {
                ++tok;
            }
            col.emplace_back(with_token(j, r, tok), term.coeff.to_double());
        }
        stage.columns[j] = std::move(col);
    }
    stages_.push_back(std::move(stage));
}

void DenseOracle::add_condprepare(TimeStamp at, const ConditionalPrepare &c) {
    const Reg &src = reg(c.source);
    const Reg &tgt = reg(c.target);
    Stage stage;
    stage.done = at;
    for (size_t j = 0; j < dim_; ++j) {
        if (token_of(j, tgt) != tgt.init) {
            continue;
        }
        const std::string &trigger = src.tokens[token_of(j, src)];
        for (const auto &[arm_trigger, expr] : c.arms) {
            if (arm_trigger != trigger) {
                continue;
            }
            std::vector<std::pair<size_t, double>> col;
            for (const auto &term : expr) {
                size_t tok = 0;
                while (tgt.tokens[tok] != term.tokens[0]) {
                    ++tok;
                }
                col.emplace_back(with_token(j, tgt, tok), term.coeff.to_double());
            }
            stage.columns[j] = std::move(col);
        }
    }
    stages_.push_back(std::move(stage));
}

void DenseOracle::add_table(TimeStamp done, const InferenceTable &table) {
    const Reg &src = reg(table.source);
    const Reg &dst = reg(table.dest);
    Stage stage;
    stage.done = done;
    for (size_t j = 0; j < dim_; ++j) {
        const std::string &held = src.tokens[token_of(j, src)];
        if (&src != &dst && token_of(j, dst) != dst.init) {
            continue;
        }
        for (const auto &row : table.rows) {
            if (row.trigger != held) {
                continue;
            }
            size_t tok = 0;
            while (dst.tokens[tok] != row.write) {
                ++tok;
            }
            stage.columns[j] = {{with_token(j, dst, tok), 1.0}};
        }
    }
    stages_.push_back(std::move(stage));
}

void DenseOracle::add_measure(TimeStamp at, const MeasureStep &m, const NamedBasis &basis) {
    std::vector<const Reg *> targets;
    std::vector<const std::vector<std::string> *> alphabets;
    for (const auto &name : m.targets) {
        targets.push_back(&reg(name));
        alphabets.push_back(&reg(name).tokens);
    }
    const Reg &dst = reg(m.dest);

    size_t local_dim = 1;
    for (const auto *t : targets) {
        local_dim *= t->tokens.size();
    }
    std::vector<size_t> lstrides(targets.size(), 1);
    for (size_t i = targets.size(); i-- > 1;) {
        lstrides[i - 1] = lstrides[i] * targets[i]->tokens.size();
    }
    std::vector<std::vector<double>> outcome_vecs;
    for (const auto &[token, expr] : basis.outcomes) {
        outcome_vecs.push_back(expr_vector(expr, alphabets));
    }

    auto records = m.records;
    if (records.empty()) {
        for (const auto &[outcome, expr] : basis.outcomes) {
            records.push_back({dst.tokens[dst.init], outcome, outcome});
        }
    }

    auto local_of = [&](size_t j) {
        size_t l = 0;
        for (size_t i = 0; i < targets.size(); ++i) {
            l += token_of(j, *targets[i]) * lstrides[i];
        }
        return l;
    };
    auto with_local = [&](size_t j, size_t l) {
        for (size_t i = 0; i < targets.size(); ++i) {
            j = with_token(j, *targets[i], (l / lstrides[i]) % targets[i]->tokens.size());
        }
        return j;
    };

    Stage stage;
    stage.done = at;
    for (size_t j = 0; j < dim_; ++j) {
        size_t l = local_of(j);
        const std::string &pre = dst.tokens[token_of(j, dst)];
        // U = sum_o P_o (x) |post(pre,o)><pre|, built entry by entry.
        std::vector<std::pair<size_t, double>> col;
        for (size_t oi = 0; oi < outcome_vecs.size(); ++oi) {
            double overlap = outcome_vecs[oi][l];
            if (overlap == 0.0) {
                continue;
            }
            const RecordRule *rule = nullptr;
            for (const auto &r : records) {
                if (r.pre == pre && r.outcome == basis.outcomes[oi].first) {
                    rule = &r;
                }
            }
            if (!rule) {
                continue;
            }
            size_t post = 0;
            while (dst.tokens[post] != rule->post) {
                ++post;
            }
            for (size_t l2 = 0; l2 < local_dim; ++l2) {
                if (outcome_vecs[oi][l2] == 0.0) {
                    continue;
                }
                size_t i = with_token(with_local(j, l2), dst, post);
                col.emplace_back(i, overlap * outcome_vecs[oi][l2]);
            }
        }
        stage.columns[j] = std::move(col); // explicit, even when empty
    }
    stages_.push_back(std::move(stage));
}

std::vector<double> DenseOracle::state_at(TimeStamp t) const {
    std::vector<double> v(dim_, 0.0);
    size_t start = 0;
    for (const auto &r : regs_) {
        start += r.init * r.stride;
    }
    v[start] = 1.0;

    for (const auto &stage : stages_) {
        if (t < stage.done) {
            break;
        }
        std::vector<double> next(dim_, 0.0);
        for (size_t j = 0; j < dim_; ++j) {
            if (v[j] == 0.0) {
                continue;
            }
            auto it = stage.columns.find(j);
            if (it == stage.columns.end()) {
                next[j] += v[j];
                continue;
            }
            for (const auto &[i, coeff] : it->second) {
                next[i] += coeff * v[j];
            }
        }
        v = std::move(next);
    }
    return v;
}

std::vector<double> DenseOracle::final_state() const { return state_at({UINT32_MAX, 59}); }

size_t DenseOracle::index_of(const std::map<std::string, std::string> &labels) const {
    size_t index = 0;
    for (const auto &[name, token] : labels) {
        const Reg &r = reg(name);
        size_t tok = 0;
        while (r.tokens[tok] != token) {
            ++tok;
        }
        index += tok * r.stride;
    }
    return index;
}

const std::string &DenseOracle::token_at(size_t index, const std::string &reg_name) const {
    const Reg &r = reg(reg_name);
    return r.tokens[token_of(index, r)];
}

} // namespace wignerbox::oracle
