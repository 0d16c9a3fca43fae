#include "vrpsd/cuts.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace vrpsd {

PartialRoute::PartialRoute(std::vector<std::vector<int>> s) : sets(std::move(s)) {
    std::set<int> seen;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        auto& si = sets[i];
        if (si.empty()) throw std::invalid_argument("partial route set must be nonempty");
        std::sort(si.begin(), si.end());
        for (int v : si) {
            if (!seen.insert(v).second) {
                throw std::invalid_argument("partial route sets must be disjoint");
            }
        }
        if (i > 0 && sets[i - 1].size() > 1 && si.size() > 1) {
            throw std::invalid_argument("two adjacent unstructured components");
        }
    }
}

std::vector<int> PartialRoute::customers() const {
    std::vector<int> all;
    for (const auto& s : sets) all.insert(all.end(), s.begin(), s.end());
    std::sort(all.begin(), all.end());
    return all;
}

int PartialRoute::customer_count() const {
    int c = 0;
    for (const auto& s : sets) c += static_cast<int>(s.size());
    return c;
}

PartialRoute PartialRoute::reversed() const {
    PartialRoute out;
    out.sets.assign(sets.rbegin(), sets.rend());
    return out;
}

PartialRoute partial_route_of_route(const Route& r) {
    PartialRoute h;
    for (int v : r) h.sets.push_back({v});
    return h;
}

namespace {

bool directed_exactly_adheres(const Route& r, const PartialRoute& h) {
    std::size_t pos = 0;
    for (const auto& s : h.sets) {
        if (pos + s.size() > r.size()) return false;
        std::vector<int> window(r.begin() + pos, r.begin() + pos + s.size());
        std::sort(window.begin(), window.end());
        if (window != s) return false;
        pos += s.size();
    }
    return pos == r.size();
}

}  // namespace

bool exactly_adheres(const Route& r, const PartialRoute& h) {
    if (static_cast<int>(r.size()) != h.customer_count()) return false;
    return directed_exactly_adheres(r, h) || directed_exactly_adheres(reversed(r), h);
}

bool adheres(const Route& r, const PartialRoute& h) {
    const std::size_t w = static_cast<std::size_t>(h.customer_count());
    if (r.size() < w) return false;
    for (std::size_t start = 0; start + w <= r.size(); ++start) {
        Route window(r.begin() + start, r.begin() + start + w);
        if (exactly_adheres(window, h)) return true;
    }
    return false;
}

bool plan_exactly_adheres(const RoutingPlan& plan, const PartialRoute& h) {
    for (const Route& r : plan.routes) {
        if (exactly_adheres(r, h)) return true;
    }
    return false;
}

bool plan_adheres(const RoutingPlan& plan, const PartialRoute& h) {
    for (const Route& r : plan.routes) {
        if (adheres(r, h)) return true;
    }
    return false;
}

Rational AffineForm::eval(const EdgeVector& x) const {
    Rational value = constant;
    for (const auto& [e, c] : coeff) value += c * x[e];
    return value;
}

void AffineForm::add_edge(int e, const Rational& c) {
    auto [it, inserted] = coeff.emplace(e, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) coeff.erase(it);
    }
}

void AffineForm::add_intra(const std::vector<int>& set, int n, const Rational& scale) {
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t j = i + 1; j < set.size(); ++j) {
            add_edge(edge_index(set[i], set[j], n), scale);
        }
    }
}

void AffineForm::add_cross(const std::vector<int>& a, const std::vector<int>& b, int n,
                           const Rational& scale) {
    for (int u : a) {
        for (int v : b) {
            add_edge(edge_index(u, v, n), scale);
        }
    }
}

const char* cut_tag_name(CutTag tag) {
    switch (tag) {
        case CutTag::Gendreau: return "gendreau";
        case CutTag::RouteCut: return "route";
        case CutTag::PrExactAdherence: return "pr_ea";
        case CutTag::PrAdherence: return "pr_a";
        case CutTag::Path: return "path";
        case CutTag::SetCut: return "set";
        case CutTag::Translated: return "translated";
    }
    return "?";
}

std::string ILSCut::dedup_key() const {
    std::ostringstream key;
    key << cut_tag_name(tag) << "|U";
    for (int v : theta_support) key << ',' << v;
    key << "|a";
    for (const auto& [e, c] : activation.coeff) key << ',' << e << ':' << format_rational(c);
    key << "|b" << format_rational(activation.constant);
    return key.str();
}

AffineForm activation_gendreau(const EdgeVector& x_bar, int n_customers, int fleet) {
    AffineForm w;
    const int m = num_edges(n_customers);
    for (int e = 0; e < m; ++e) {
        if (x_bar[e] == 0) continue;
        auto [u, v] = edge_ends(e, n_customers);
        if (u == 0) continue;
        w.add_edge(e, Rational(1));
    }
    w.constant = Rational(1 - n_customers + fleet);
    return w;
}

namespace {

const std::vector<int> kDepot = {0};

// x(H) = sum of intra-set terms plus consecutive cross terms.
void add_x_of_h(AffineForm& w, const PartialRoute& h, int n) {
    for (const auto& s : h.sets) w.add_intra(s, n, Rational(1));
    for (std::size_t i = 0; i + 1 < h.sets.size(); ++i) {
        w.add_cross(h.sets[i], h.sets[i + 1], n, Rational(1));
    }
}

}  // namespace

AffineForm activation_wof_superset(const PartialRoute& h, int n_customers) {
    const std::size_t l = h.length();
    if (l == 0) throw std::invalid_argument("empty partial route");
    AffineForm w;
    add_x_of_h(w, h, n_customers);
    w.constant = Rational(2 - h.customer_count());

    auto gate = [&](const std::vector<int>& inner) {
        w.add_intra(inner, n_customers, Rational(1));
        w.constant += Rational(1 - static_cast<int>(inner.size()));
    };
    if (l == 3) {
        if (h.sets[0].size() == 1 || h.sets[2].size() == 1) gate(h.sets[1]);
    } else if (l == 2 || l >= 4) {
        if (h.sets[0].size() == 1) gate(h.sets[1]);
        if (h.sets[l - 1].size() == 1) gate(h.sets[l - 2]);
    }
    return w;
}

AffineForm activation_wof_exact(const PartialRoute& h, int n_customers) {
    const std::size_t l = h.length();
    AffineForm w = activation_wof_superset(h, n_customers);
    if (l == 1) {
        w.add_cross(kDepot, h.sets[0], n_customers, Rational(1));
        w.add_intra(h.sets[0], n_customers, Rational(2));
        w.constant -= Rational(2 * static_cast<int>(h.sets[0].size()));
    } else {
        w.add_cross(kDepot, h.sets[0], n_customers, Rational(1));
        w.add_intra(h.sets[0], n_customers, Rational(2));
        w.add_cross(h.sets[0], h.sets[1], n_customers, Rational(1));
        w.constant -= Rational(2 * static_cast<int>(h.sets[0].size()));

        w.add_cross(kDepot, h.sets[l - 1], n_customers, Rational(1));
        w.add_intra(h.sets[l - 1], n_customers, Rational(2));
        w.add_cross(h.sets[l - 2], h.sets[l - 1], n_customers, Rational(1));
        w.constant -= Rational(2 * static_cast<int>(h.sets[l - 1].size()));
    }
    return w;
}

AffineForm activation_whs(const PartialRoute& h, int n_customers) {
    const int l = static_cast<int>(h.length());
    if (l == 0) throw std::invalid_argument("empty partial route");

    std::vector<int> alpha(l + 1, 0);  // 1-based
    if (l == 1) {
        alpha[1] = 3;
    } else if (l == 2) {
        alpha[1] = alpha[2] = 4;
    } else if (l == 3) {
        alpha = {0, 3, 2, 3};
    } else {
        for (int i = 1; i <= l; ++i) alpha[i] = 1;
        alpha[1] = alpha[l] = 3;
        alpha[2] = alpha[l - 1] = 2;
    }
    std::vector<int> beta(l + 1, 0);  // index 0..l
    if (l == 1) {
        beta = {1, 0};
    } else if (l == 2) {
        beta = {1, 3, 1};
    } else {
        for (int i = 0; i <= l; ++i) beta[i] = 1;
        beta[1] = beta[l - 1] = 2;
    }
    Rational gamma(l == 1 ? 0 : 1);

    AffineForm w;
    w.constant = gamma;
    for (int i = 1; i <= l; ++i) {
        const auto& s = h.sets[i - 1];
        w.add_intra(s, n_customers, Rational(alpha[i]));
        w.constant += Rational(alpha[i]) * Rational(1 - static_cast<int>(s.size()));
    }
    for (int i = 0; i <= l; ++i) {
        const std::vector<int>& a = (i == 0) ? kDepot : h.sets[i - 1];
        const std::vector<int>& b = (i == l) ? kDepot : h.sets[i];
        if (beta[i] == 0) continue;
        w.add_cross(a, b, n_customers, Rational(beta[i]));
        w.constant -= Rational(beta[i]);
    }
    return w;
}

AffineForm activation_set(const std::vector<int>& customers, int k_tilde, int n_customers) {
    if (customers.empty()) throw std::invalid_argument("empty set for set activation");
    AffineForm w;
    w.add_intra(customers, n_customers, Rational(1));
    w.constant = Rational(1 - static_cast<int>(customers.size()) + k_tilde);
    return w;
}

ILSCut make_cut(std::vector<int> theta_support, const Rational& bound, AffineForm activation,
                CutTag tag) {
    if (bound < 0) throw std::invalid_argument("cut bound must be nonnegative");
    std::sort(theta_support.begin(), theta_support.end());
    ILSCut cut;
    cut.theta_support = std::move(theta_support);
    cut.bound = bound;
    cut.activation = std::move(activation);
    cut.tag = tag;
    return cut;
}

ILSCut translate_cut(const ILSCut& cut, const std::vector<Rational>& global_lb) {
    Rational lb_u = 0;
    for (int v : cut.theta_support) lb_u += global_lb.at(v);
    Rational reduced = cut.bound - lb_u;
    if (reduced < 0) reduced = 0;
    ILSCut out = cut;
    out.bound = reduced;
    out.tag = CutTag::Translated;
    return out;
}

}  // namespace vrpsd
