#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gradpoly/errors.hpp"

namespace gradpoly {

/// One multivariate polynomial degree: per-dimension exponents.
struct MultiIndex {
    std::vector<int> degrees;

    int dim() const { return static_cast<int>(degrees.size()); }
    int total_degree() const { return std::accumulate(degrees.begin(), degrees.end(), 0); }
    int operator[](int k) const { return degrees[static_cast<std::size_t>(k)]; }

    bool operator==(const MultiIndex& o) const { return degrees == o.degrees; }

    /// Graded order: total degree first, then lexicographic on the tuple.
    static bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
        const int da = a.total_degree();
        const int db = b.total_degree();
        if (da != db) return da < db;
        return a.degrees < b.degrees;
    }
};

/// Hyperbolically truncated set of multi-indices: all beta with
/// sum_i beta_i^p <= q^p. Indices are kept in graded-lex order, so the
/// zero index is always first and prefixes of the list are themselves
/// graded.
class MultiIndexSet {
public:
    MultiIndexSet() = default;

    static MultiIndexSet hyperbolic(int l, double q, double p) {
        if (l < 1) throw parameter_error("MultiIndexSet: dimension must be >= 1");
        if (!(p > 0.0) || p > 1.0) throw parameter_error("MultiIndexSet: p must be in (0,1]");
        if (q < 0.0) throw parameter_error("MultiIndexSet: q must be >= 0");

        MultiIndexSet s;
        s.dim_ = l;
        s.q_ = q;
        s.p_ = p;

        const double budget = std::pow(q, p) + kBoundaryTol;
        const int bmax = static_cast<int>(std::floor(q + kBoundaryTol));
        std::vector<int> cur(static_cast<std::size_t>(l), 0);
        enumerate(s.indices_, cur, 0, 0.0, budget, bmax, p);
        std::sort(s.indices_.begin(), s.indices_.end(), MultiIndex::graded_lex_less);
        return s;
    }

    /// Rebuild a set from an explicit index list (e.g. deserialization).
    /// The list must already be graded-lex ordered and duplicate free.
    static MultiIndexSet from_indices(int l, double q, double p, std::vector<MultiIndex> indices) {
        if (l < 1) throw parameter_error("MultiIndexSet: dimension must be >= 1");
        if (indices.empty()) throw parameter_error("MultiIndexSet: empty index list");
        for (const auto& idx : indices) {
            if (idx.dim() != l) throw parameter_error("MultiIndexSet: index dimension mismatch");
            for (int d : idx.degrees)
                if (d < 0) throw parameter_error("MultiIndexSet: negative degree");
        }
        if (!std::is_sorted(indices.begin(), indices.end(), MultiIndex::graded_lex_less))
            throw parameter_error("MultiIndexSet: indices not in graded-lex order");
        if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
            throw parameter_error("MultiIndexSet: duplicate index");
        if (indices.front().total_degree() != 0)
            throw parameter_error("MultiIndexSet: zero index missing");
        MultiIndexSet s;
        s.dim_ = l;
        s.q_ = q;
        s.p_ = p;
        s.indices_ = std::move(indices);
        return s;
    }

    int dim() const { return dim_; }
    double q() const { return q_; }
    double p() const { return p_; }
    std::size_t size() const { return indices_.size(); }
    const std::vector<MultiIndex>& indices() const { return indices_; }
    const MultiIndex& operator[](std::size_t j) const { return indices_[j]; }

    bool contains(const MultiIndex& idx) const {
        return std::binary_search(indices_.begin(), indices_.end(), idx,
                                  MultiIndex::graded_lex_less);
    }

    /// First `count` indices in graded-lex order (q/p metadata retained).
    MultiIndexSet prefix(std::size_t count) const {
        if (count < 1 || count > indices_.size())
            throw parameter_error("MultiIndexSet::prefix: count out of range");
        MultiIndexSet s(*this);
        s.indices_.resize(count);
        return s;
    }

    void save(std::ostream& os) const {
        os << dim_ << ' ' << q_ << ' ' << p_ << '\n';
        for (const auto& idx : indices_) {
            for (int k = 0; k < dim_; ++k) os << (k ? " " : "") << idx.degrees[static_cast<std::size_t>(k)];
            os << '\n';
        }
    }

    void save(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw io_error("cannot open " + path + " for writing");
        save(os);
    }

    static MultiIndexSet load(std::istream& is) {
        std::string line;
        if (!next_content_line(is, line)) throw io_error("index set: missing header line");
        MultiIndexSet s;
        {
            std::istringstream ls(line);
            if (!(ls >> s.dim_ >> s.q_ >> s.p_)) throw io_error("index set: malformed header 'l q p'");
        }
        if (s.dim_ < 1) throw io_error("index set: dimension must be >= 1");
        while (next_content_line(is, line)) {
            std::istringstream ls(line);
            MultiIndex idx;
            int d = 0;
            while (ls >> d) {
                if (d < 0) throw io_error("index set: negative degree");
                idx.degrees.push_back(d);
            }
            if (idx.dim() != s.dim_) throw io_error("index set: wrong entry count in index line");
            s.indices_.push_back(std::move(idx));
        }
        if (s.indices_.empty()) throw io_error("index set: no indices");
        if (!std::is_sorted(s.indices_.begin(), s.indices_.end(), MultiIndex::graded_lex_less))
            throw io_error("index set: indices not in graded-lex order");
        if (std::adjacent_find(s.indices_.begin(), s.indices_.end()) != s.indices_.end())
            throw io_error("index set: duplicate index");
        if (s.indices_.front().total_degree() != 0)
            throw io_error("index set: zero index missing");
        return s;
    }

    static MultiIndexSet load_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw io_error("cannot open " + path);
        return load(is);
    }

private:
    static constexpr double kBoundaryTol = 1e-12;

    static void enumerate(std::vector<MultiIndex>& out, std::vector<int>& cur, int k,
                          double partial, double budget, int bmax, double p) {
        if (k == static_cast<int>(cur.size())) {
            out.push_back(MultiIndex{cur});
            return;
        }
        for (int b = 0; b <= bmax; ++b) {
            const double t = partial + (b == 0 ? 0.0 : std::pow(static_cast<double>(b), p));
            if (t > budget) break;
            cur[static_cast<std::size_t>(k)] = b;
            enumerate(out, cur, k + 1, t, budget, bmax, p);
        }
        cur[static_cast<std::size_t>(k)] = 0;
    }

    static bool next_content_line(std::istream& is, std::string& line) {
        while (std::getline(is, line)) {
            const auto pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos) continue;
            if (line[pos] == '#') continue;
            return true;
        }
        return false;
    }

    int dim_ = 0;
    double q_ = 0.0;
    double p_ = 1.0;
    std::vector<MultiIndex> indices_;
};

/// Number of multi-indices with total degree <= q in l dimensions,
/// i.e. binomial(l+q, q).
inline std::int64_t count_total_degree(int l, int q) {
    if (l < 1) throw parameter_error("count_total_degree: dimension must be >= 1");
    if (q < 0) throw parameter_error("count_total_degree: degree bound must be >= 0");
    std::uint64_t c = 1;
    for (int i = 1; i <= q; ++i) {
        // exact at every step: c holds binomial(l+i, i) after the update
        c = c * static_cast<std::uint64_t>(l + i) / static_cast<std::uint64_t>(i);
    }
    return static_cast<std::int64_t>(c);
}

} // namespace gradpoly
