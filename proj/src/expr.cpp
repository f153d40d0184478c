#include "mws/expr.hpp"

#include <cmath>
#include <stdexcept>

namespace mws {

namespace {

struct OpInfo {
    const char* name;
    Expr::Op op;
    int arity;  // expression arguments (thresholds/constants excluded)
};

const OpInfo kOps[] = {
    {"const", Expr::Op::kConst, 0},   {"var", Expr::Op::kVar, 0},
    {"param", Expr::Op::kParam, 0},   {"add", Expr::Op::kAdd, 2},
    {"sub", Expr::Op::kSub, 2},       {"mul", Expr::Op::kMul, 2},
    {"sin", Expr::Op::kSin, 1},       {"cos", Expr::Op::kCos, 1},
    {"abs", Expr::Op::kAbs, 1},       {"square", Expr::Op::kSquare, 1},
    {"radial", Expr::Op::kRadial, 1}, {"hinge", Expr::Op::kHinge, 1},
    {"select", Expr::Op::kSelect, 3},
};

const OpInfo& info_for(const std::string& name) {
    for (const auto& o : kOps)
        if (name == o.name) return o;
    throw std::invalid_argument("expression: unknown op '" + name + "'");
}

const char* name_for(Expr::Op op) {
    for (const auto& o : kOps)
        if (op == o.op) return o.name;
    throw std::logic_error("expression: unnamed op");
}

}  // namespace

Expr Expr::parse(const nlohmann::json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_string())
        throw std::invalid_argument("expression: node must be [\"op\", ...]");
    const auto& info = info_for(j[0].get<std::string>());
    Expr e;
    e.op_ = info.op;
    switch (info.op) {
        case Op::kConst:
            if (j.size() != 2 || !j[1].is_number())
                throw std::invalid_argument("expression: const needs one number");
            e.value_ = j[1].get<double>();
            return e;
        case Op::kVar:
        case Op::kParam:
            if (j.size() != 2 || !j[1].is_string())
                throw std::invalid_argument("expression: var/param needs a name");
            e.name_ = j[1].get<std::string>();
            return e;
        case Op::kHinge:
            if (j.size() != 3 || !j[2].is_number())
                throw std::invalid_argument(
                    "expression: hinge needs [\"hinge\", expr, threshold]");
            e.args_.push_back(parse(j[1]));
            e.value_ = j[2].get<double>();
            return e;
        default:
            if (static_cast<int>(j.size()) != info.arity + 1)
                throw std::invalid_argument(std::string("expression: ") + info.name +
                                            " expects " + std::to_string(info.arity) +
                                            " arguments");
            for (int a = 0; a < info.arity; ++a)
                e.args_.push_back(parse(j[static_cast<size_t>(a) + 1]));
            return e;
    }
}

nlohmann::json Expr::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    j.push_back(name_for(op_));
    switch (op_) {
        case Op::kConst:
            j.push_back(value_);
            break;
        case Op::kVar:
        case Op::kParam:
            j.push_back(name_);
            break;
        case Op::kHinge:
            j.push_back(args_[0].to_json());
            j.push_back(value_);
            break;
        default:
            for (const auto& a : args_) j.push_back(a.to_json());
    }
    return j;
}

double Expr::eval(const Env& env) const {
    switch (op_) {
        case Op::kConst:
            return value_;
        case Op::kVar:
        case Op::kParam: {
            const auto it = env.find(name_);
            if (it == env.end())
                throw std::invalid_argument("expression: unbound name '" + name_ + "'");
            return it->second;
        }
        case Op::kAdd:
            return args_[0].eval(env) + args_[1].eval(env);
        case Op::kSub:
            return args_[0].eval(env) - args_[1].eval(env);
        case Op::kMul:
            return args_[0].eval(env) * args_[1].eval(env);
        case Op::kSin:
            return std::sin(args_[0].eval(env));
        case Op::kCos:
            return std::cos(args_[0].eval(env));
        case Op::kAbs:
            return std::fabs(args_[0].eval(env));
        case Op::kSquare: {
            const double v = args_[0].eval(env);
            return v * v;
        }
        case Op::kRadial: {
            const double v = args_[0].eval(env);
            return std::exp(-v * v);
        }
        case Op::kHinge:
            return std::max(0.0, args_[0].eval(env) - value_);
        case Op::kSelect:
            return args_[0].eval(env) > 0.0 ? args_[1].eval(env) : args_[2].eval(env);
    }
    throw std::logic_error("expression: bad op");
}

void Expr::collect_vars(std::set<std::string>& out) const {
    if (op_ == Op::kVar) out.insert(name_);
    for (const auto& a : args_) a.collect_vars(out);
}

void Expr::collect_params(std::set<std::string>& out) const {
    if (op_ == Op::kParam) out.insert(name_);
    for (const auto& a : args_) a.collect_params(out);
}

}  // namespace mws
