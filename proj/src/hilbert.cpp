#include "wignerbox/hilbert.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace wignerbox {

size_t RegisterSpace::add_register(const std::string &name, std::vector<std::string> tokens,
                                   const std::string &init_token) {
    if (has_register(name)) {
        throw std::invalid_argument("duplicate register: " + name);
    }
    if (tokens.empty()) {
        throw std::invalid_argument("register " + name + " has an empty alphabet");
    }
    std::set<std::string> seen;
    for (const auto &t : tokens) {
        if (!seen.insert(t).second) {
            throw std::invalid_argument("register " + name + " repeats token " + t);
        }
    }
    Register r;
    r.name = name;
    r.tokens = std::move(tokens);
    auto it = std::find(r.tokens.begin(), r.tokens.end(), init_token);
    if (it == r.tokens.end()) {
        throw std::invalid_argument("register " + name + " init token " + init_token +
                                    " not in alphabet");
    }
    r.init = static_cast<uint16_t>(it - r.tokens.begin());
    regs_.push_back(std::move(r));
    return regs_.size() - 1;
}

bool RegisterSpace::has_register(const std::string &name) const {
    for (const auto &r : regs_) {
        if (r.name == name) {
            return true;
        }
    }
    return false;
}

size_t RegisterSpace::index_of(const std::string &name) const {
    for (size_t i = 0; i < regs_.size(); ++i) {
        if (regs_[i].name == name) {
            return i;
        }
    }
    throw std::out_of_range("no register named " + name);
}

uint16_t RegisterSpace::token_index(size_t reg, const std::string &token) const {
    const auto &toks = regs_.at(reg).tokens;
    for (size_t i = 0; i < toks.size(); ++i) {
        if (toks[i] == token) {
            return static_cast<uint16_t>(i);
        }
    }
    throw std::out_of_range("register " + regs_.at(reg).name + " has no token " + token);
}

bool RegisterSpace::has_token(size_t reg, const std::string &token) const {
    const auto &toks = regs_.at(reg).tokens;
    return std::find(toks.begin(), toks.end(), token) != toks.end();
}

template <typename A> StateVector<A> StateVector<A>::initial(SpacePtr space) {
    StateVector<A> psi(space);
    LabelKey key;
    key.reserve(space->size());
    for (const auto &r : space->registers()) {
        key.push_back(r.init);
    }
    psi.add_term(key, amp_traits<A>::one());
    return psi;
}

template <typename A> void StateVector<A>::add_term(const LabelKey &key, const A &amp) {
    if (key.size() != space_->size()) {
        throw std::invalid_argument("label tuple arity does not match register space");
    }
    auto [it, inserted] = terms_.try_emplace(key, amp);
    if (!inserted) {
        it->second = it->second + amp;
    }
    if (amp_traits<A>::is_zero(it->second)) {
        terms_.erase(it);
    }
}

template <typename A> A StateVector<A>::amplitude(const LabelKey &key) const {
    auto it = terms_.find(key);
    return it == terms_.end() ? A{} : it->second;
}

template <typename A> A StateVector<A>::squared_norm() const {
    A total{};
    for (const auto &[key, amp] : terms_) {
        total = total + amp * amp;
    }
    return total;
}

template <typename A> bool StateVector<A>::is_normalized() const {
    return amp_traits<A>::close(squared_norm(), amp_traits<A>::one());
}

template <typename A> StateVector<A> StateVector<A>::scaled(const A &factor) const {
    StateVector<A> out(space_);
    for (const auto &[key, amp] : terms_) {
        out.add_term(key, amp * factor);
    }
    return out;
}

namespace {

LabelKey subkey(const LabelKey &key, const std::vector<size_t> &regs) {
    LabelKey out;
    out.reserve(regs.size());
    for (size_t r : regs) {
        out.push_back(key.at(r));
    }
    return out;
}

std::string label_str(const LabelKey &key) {
    std::ostringstream out;
    out << "(";
    for (size_t i = 0; i < key.size(); ++i) {
        out << (i ? "," : "") << key[i];
    }
    out << ")";
    return out.str();
}

template <typename A> A dot(const SubVector<A> &a, const SubVector<A> &b) {
    // Amplitudes are real throughout, so no conjugation.
    A total{};
    for (const auto &[la, ca] : a) {
        for (const auto &[lb, cb] : b) {
            if (la == lb) {
                total = total + ca * cb;
            }
        }
    }
    return total;
}

} // namespace

template <typename A> void BasisMapOperator<A>::check_isometry() const {
    std::set<LabelKey> inputs;
    for (const auto &row : rows) {
        if (row.input.size() != domain.size()) {
            throw IsometryViolation("row input arity does not match domain");
        }
        if (!inputs.insert(row.input).second) {
            throw IsometryViolation("duplicate row input " + label_str(row.input));
        }
    }
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = i; j < rows.size(); ++j) {
            A d = dot(rows[i].output, rows[j].output);
            A expected = (i == j) ? amp_traits<A>::one() : A{};
            if (!amp_traits<A>::close(d, expected)) {
                throw IsometryViolation("rows " + label_str(rows[i].input) + " and " +
                                        label_str(rows[j].input) + " have non-orthonormal outputs");
            }
        }
    }
}

template <typename A> void MeasurementBasis<A>::check_orthonormal() const {
    std::set<std::string> names;
    for (const auto &o : outcomes) {
        if (!names.insert(o.token).second) {
            throw IsometryViolation("basis " + name + ": duplicate outcome " + o.token);
        }
    }
    for (size_t i = 0; i < outcomes.size(); ++i) {
        for (size_t j = i; j < outcomes.size(); ++j) {
            A d = dot(outcomes[i].vec, outcomes[j].vec);
            A expected = (i == j) ? amp_traits<A>::one() : A{};
            if (!amp_traits<A>::close(d, expected)) {
                throw IsometryViolation("basis " + name + ": outcomes " + outcomes[i].token +
                                        " and " + outcomes[j].token + " not orthonormal");
            }
        }
    }
}

template <typename A>
StateVector<A> apply(const BasisMapOperator<A> &op, const StateVector<A> &psi) {
    op.check_isometry();
    std::map<LabelKey, const typename BasisMapOperator<A>::Row *> by_input;
    for (const auto &row : op.rows) {
        by_input[row.input] = &row;
    }

    StateVector<A> out(psi.space());
    std::set<LabelKey> unlisted_support;
    std::set<const typename BasisMapOperator<A>::Row *> fired;
    for (const auto &[key, amp] : psi.terms()) {
        LabelKey sub = subkey(key, op.domain);
        auto it = by_input.find(sub);
        if (it == by_input.end()) {
            // Identity on unlisted labels.
            unlisted_support.insert(sub);
            out.add_term(key, amp);
            continue;
        }
        fired.insert(it->second);
        for (const auto &[out_label, coeff] : it->second->output) {
            LabelKey new_key = key;
            for (size_t d = 0; d < op.domain.size(); ++d) {
                new_key[op.domain[d]] = out_label[d];
            }
            out.add_term(new_key, amp * coeff);
        }
    }

    // The identity completion is only an isometry if the labels it passes
    // through stay orthogonal to every output actually produced.
    for (const auto *row : fired) {
        for (const auto &[out_label, coeff] : row->output) {
            if (unlisted_support.count(out_label)) {
                throw IsometryViolation("output of row " + label_str(row->input) +
                                        " overlaps unlisted support label " +
                                        label_str(out_label));
            }
        }
    }
    return out;
}

namespace {

// Groups psi's terms by the labels outside `targets`: for every context key
// (target positions masked to zero) the vector of (target sub-label, amp).
template <typename A>
std::map<LabelKey, SubVector<A>> group_by_context(const StateVector<A> &psi,
                                                  const std::vector<size_t> &targets) {
    std::map<LabelKey, SubVector<A>> groups;
    for (const auto &[key, amp] : psi.terms()) {
        LabelKey ctx = key;
        for (size_t t : targets) {
            ctx[t] = 0;
        }
        groups[ctx].emplace_back(subkey(key, targets), amp);
    }
    return groups;
}

template <typename A> A sub_norm2(const SubVector<A> &v) {
    A total{};
    for (const auto &[label, amp] : v) {
        total = total + amp * amp;
    }
    return total;
}

} // namespace

template <typename A>
std::map<std::string, A> born_distribution(const StateVector<A> &psi,
                                           const MeasurementBasis<A> &basis) {
    basis.check_orthonormal();
    auto groups = group_by_context(psi, basis.targets);
    std::map<std::string, A> probs;
    for (const auto &o : basis.outcomes) {
        probs[o.token] = A{};
    }
    A captured{};
    for (const auto &[ctx, vec] : groups) {
        for (const auto &o : basis.outcomes) {
            A c = dot(o.vec, vec);
            A p = c * c;
            probs[o.token] = probs[o.token] + p;
            captured = captured + p;
        }
    }
    if (!amp_traits<A>::close(captured, psi.squared_norm())) {
        throw SupportLeakage("state has amplitude outside the span of basis " + basis.name);
    }
    return probs;
}

template <typename A>
std::pair<A, StateVector<A>> project(const StateVector<A> &psi, const MeasurementBasis<A> &basis,
                                     const std::string &outcome) {
    basis.check_orthonormal();
    const typename MeasurementBasis<A>::Outcome *chosen = nullptr;
    for (const auto &o : basis.outcomes) {
        if (o.token == outcome) {
            chosen = &o;
        }
    }
    if (!chosen) {
        throw std::invalid_argument("basis " + basis.name + " has no outcome " + outcome);
    }
    auto groups = group_by_context(psi, basis.targets);
    A prob{};
    StateVector<A> projected(psi.space());
    for (const auto &[ctx, vec] : groups) {
        A c = dot(chosen->vec, vec);
        if (amp_traits<A>::is_zero(c)) {
            continue;
        }
        prob = prob + c * c;
        for (const auto &[label, coeff] : chosen->vec) {
            LabelKey key = ctx;
            for (size_t t = 0; t < basis.targets.size(); ++t) {
                key[basis.targets[t]] = label[t];
            }
            projected.add_term(key, c * coeff);
        }
    }
    if (amp_traits<A>::is_zero(prob)) {
        throw ZeroProbabilityOutcome("outcome " + outcome + " has probability zero");
    }
    return {prob, projected.scaled(amp_traits<A>::one() / amp_traits<A>::sqrt(prob))};
}

template <typename A>
StateVector<A> record_measurement(const StateVector<A> &psi, const MeasurementBasis<A> &basis,
                                  size_t dest, const RecordTokenMap &token_map) {
    basis.check_orthonormal();
    for (size_t t : basis.targets) {
        if (t == dest) {
            throw std::invalid_argument("measurement dest must not be a measured register");
        }
    }
    {
        std::set<uint16_t> posts;
        for (const auto &[pre_outcome, post] : token_map) {
            if (!posts.insert(post).second) {
                throw IsometryViolation("record token map is not injective");
            }
        }
    }

    auto groups = group_by_context(psi, basis.targets);
    StateVector<A> out(psi.space());
    A captured{};
    for (const auto &[ctx, vec] : groups) {
        uint16_t pre = ctx.at(dest);
        for (size_t oi = 0; oi < basis.outcomes.size(); ++oi) {
            const auto &o = basis.outcomes[oi];
            A c = dot(o.vec, vec);
            if (amp_traits<A>::is_zero(c)) {
                continue;
            }
            captured = captured + c * c;
            auto it = token_map.find({pre, oi});
            if (it == token_map.end()) {
                throw DestNotReady("dest register holds token '" +
                                   psi.space()->token_name(dest, pre) +
                                   "' with no record rule for outcome " + o.token);
            }
            for (const auto &[label, coeff] : o.vec) {
                LabelKey key = ctx;
                for (size_t t = 0; t < basis.targets.size(); ++t) {
                    key[basis.targets[t]] = label[t];
                }
                key[dest] = it->second;
                out.add_term(key, c * coeff);
            }
        }
    }
    if (!amp_traits<A>::close(captured, psi.squared_norm())) {
        throw SupportLeakage("state has amplitude outside the span of basis " + basis.name);
    }
    return out;
}

namespace {

template <typename A>
SpacePtr presentation_space(const StateVector<A> &psi, const MeasurementBasis<A> &basis) {
    size_t anchor = *std::min_element(basis.targets.begin(), basis.targets.end());
    auto derived = std::make_shared<RegisterSpace>();
    for (size_t i = 0; i < psi.space()->size(); ++i) {
        if (i == anchor) {
            std::vector<std::string> toks;
            for (const auto &o : basis.outcomes) {
                toks.push_back(o.token);
            }
            derived->add_register(basis.name, toks, toks.front());
            continue;
        }
        if (std::find(basis.targets.begin(), basis.targets.end(), i) != basis.targets.end()) {
            continue;
        }
        const Register &r = psi.space()->reg(i);
        derived->add_register(r.name, r.tokens, r.tokens[r.init]);
    }
    return derived;
}

} // namespace

template <typename A>
StateVector<A> rewrite_in_basis(const StateVector<A> &psi, const MeasurementBasis<A> &basis) {
    basis.check_orthonormal();
    SpacePtr derived = presentation_space(psi, basis);
    size_t anchor = *std::min_element(basis.targets.begin(), basis.targets.end());

    auto groups = group_by_context(psi, basis.targets);
    StateVector<A> out(derived);
    for (const auto &[ctx, vec] : groups) {
        A accounted{};
        for (size_t oi = 0; oi < basis.outcomes.size(); ++oi) {
            A c = dot(basis.outcomes[oi].vec, vec);
            accounted = accounted + c * c;
            if (amp_traits<A>::is_zero(c)) {
                continue;
            }
            LabelKey key;
            key.reserve(derived->size());
            for (size_t i = 0; i < psi.space()->size(); ++i) {
                if (i == anchor) {
                    key.push_back(static_cast<uint16_t>(oi));
                } else if (std::find(basis.targets.begin(), basis.targets.end(), i) !=
                           basis.targets.end()) {
                    continue;
                } else {
                    key.push_back(ctx[i]);
                }
            }
            out.add_term(key, c);
        }
        if (!amp_traits<A>::close(accounted, sub_norm2(vec))) {
            throw SupportLeakage("support outside the span of basis " + basis.name);
        }
    }
    return out;
}

template <typename A>
StateVector<A> expand_from_basis(const StateVector<A> &presentation,
                                 const MeasurementBasis<A> &basis, const SpacePtr &original) {
    size_t anchor = *std::min_element(basis.targets.begin(), basis.targets.end());
    size_t pseudo = presentation.space()->index_of(basis.name);

    StateVector<A> out(original);
    for (const auto &[key, amp] : presentation.terms()) {
        const auto &o = basis.outcomes.at(key[pseudo]);
        for (const auto &[label, coeff] : o.vec) {
            LabelKey full(original->size(), 0);
            size_t src = 0;
            for (size_t i = 0; i < original->size(); ++i) {
                if (std::find(basis.targets.begin(), basis.targets.end(), i) !=
                    basis.targets.end()) {
                    if (i == anchor) {
                        ++src; // skip the pseudo register
                    }
                    continue;
                }
                full[i] = key[src++];
            }
            for (size_t t = 0; t < basis.targets.size(); ++t) {
                full[basis.targets[t]] = label[t];
            }
            out.add_term(full, amp * coeff);
        }
    }
    return out;
}

template <typename A>
std::map<std::string, A> marginal_distribution(const StateVector<A> &psi, size_t reg) {
    std::map<std::string, A> out;
    for (const auto &[key, amp] : psi.terms()) {
        const std::string &tok = psi.space()->token_name(reg, key[reg]);
        auto [it, inserted] = out.try_emplace(tok, amp * amp);
        if (!inserted) {
            it->second = it->second + amp * amp;
        }
    }
    return out;
}

StateVector<double> to_float(const StateVector<ExactReal> &psi) {
    StateVector<double> out(psi.space());
    for (const auto &[key, amp] : psi.terms()) {
        out.add_term(key, amp.to_double());
    }
    return out;
}

template class StateVector<ExactReal>;
template class StateVector<double>;
template struct BasisMapOperator<ExactReal>;
template struct BasisMapOperator<double>;
template struct MeasurementBasis<ExactReal>;
template struct MeasurementBasis<double>;

template StateVector<ExactReal> apply(const BasisMapOperator<ExactReal> &,
                                      const StateVector<ExactReal> &);
template StateVector<double> apply(const BasisMapOperator<double> &, const StateVector<double> &);
template std::map<std::string, ExactReal> born_distribution(const StateVector<ExactReal> &,
                                                            const MeasurementBasis<ExactReal> &);
template std::map<std::string, double> born_distribution(const StateVector<double> &,
                                                         const MeasurementBasis<double> &);
template std::pair<ExactReal, StateVector<ExactReal>>
project(const StateVector<ExactReal> &, const MeasurementBasis<ExactReal> &, const std::string &);
template std::pair<double, StateVector<double>> project(const StateVector<double> &,
                                                        const MeasurementBasis<double> &,
                                                        const std::string &);
template StateVector<ExactReal> record_measurement(const StateVector<ExactReal> &,
                                                   const MeasurementBasis<ExactReal> &, size_t,
                                                   const RecordTokenMap &);
template StateVector<double> record_measurement(const StateVector<double> &,
                                                const MeasurementBasis<double> &, size_t,
                                                const RecordTokenMap &);
template StateVector<ExactReal> rewrite_in_basis(const StateVector<ExactReal> &,
                                                 const MeasurementBasis<ExactReal> &);
template StateVector<double> rewrite_in_basis(const StateVector<double> &,
                                              const MeasurementBasis<double> &);
template StateVector<ExactReal> expand_from_basis(const StateVector<ExactReal> &,
                                                  const MeasurementBasis<ExactReal> &,
                                                  const SpacePtr &);
template StateVector<double> expand_from_basis(const StateVector<double> &,
                                               const MeasurementBasis<double> &, const SpacePtr &);
template std::map<std::string, ExactReal> marginal_distribution(const StateVector<ExactReal> &,
                                                                size_t);
template std::map<std::string, double> marginal_distribution(const StateVector<double> &, size_t);

} // namespace wignerbox
