#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace mws {

// Small expression DSL over named scalars. Serialized as nested prefix-form
// arrays, e.g. ["add", ["mul", ["param","amp"], ["sin", ["var","x0"]]], ...].
class Expr {
public:
    enum class Op {
        kConst,
        kVar,    // latent or feature value
        kParam,  // search-block parameter
        kAdd,
        kSub,
        kMul,
        kSin,
        kCos,
        kAbs,
        kSquare,
        kRadial,  // exp(-x^2)
        kHinge,   // max(0, x - threshold)
        kSelect,  // cond > 0 ? a : b
    };

    using Env = std::map<std::string, double>;

    static Expr parse(const nlohmann::json& j);
    nlohmann::json to_json() const;

    double eval(const Env& env) const;

    // Names referenced by kVar / kParam nodes.
    void collect_vars(std::set<std::string>& out) const;
    void collect_params(std::set<std::string>& out) const;

    Op op() const { return op_; }

private:
    Op op_ = Op::kConst;
    double value_ = 0.0;      // kConst / kHinge threshold
    std::string name_;        // kVar / kParam
    std::vector<Expr> args_;
};

}  // namespace mws
