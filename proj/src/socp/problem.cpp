#include "socp/problem.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include "socp/error.hpp"

namespace socp {

void SocpProblem::validate() const
{
    const auto n = static_cast<std::int32_t>(layout.dim());
    if (layout.dim() == 0) {
        throw DimensionError("SocpProblem: empty cone layout");
    }
    if (A.symmetric()) {
        throw DimensionError("SocpProblem: A must be stored unsymmetric");
    }
    if (A.cols() != n || c.size() != layout.dim()) {
        throw DimensionError("SocpProblem: A has " + std::to_string(A.cols()) + " columns and c has " +
                             std::to_string(c.size()) + " entries for cone dimension " +
                             std::to_string(n));
    }
    if (A.rows() != static_cast<std::int32_t>(b.size())) {
        throw DimensionError("SocpProblem: A has " + std::to_string(A.rows()) + " rows but b has " +
                             std::to_string(b.size()));
    }
}

namespace {

class Tokens {
public:
    explicit Tokens(std::istream& in) : in_(in) {}

    std::string word(const char* what)
    {
        std::string t;
        if (!(in_ >> t)) {
            throw FormatError(std::string("problem file: unexpected end of input reading ") + what);
        }
        return t;
    }

    long long integer(const char* what)
    {
        const std::string t = word(what);
        long long v = 0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
            throw FormatError(std::string("problem file: bad integer '") + t + "' for " + what);
        }
        return v;
    }

    double real(const char* what)
    {
        const std::string t = word(what);
        double v = 0.0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
            throw FormatError(std::string("problem file: bad number '") + t + "' for " + what);
        }
        return v;
    }

private:
    std::istream& in_;
};

} // namespace

SocpProblem read_problem(std::istream& in)
{
    Tokens tok(in);
    if (tok.word("header") != "socp") {
        throw FormatError("problem file: header must start with \"socp\"");
    }
    const long long n = tok.integer("n");
    const long long p = tok.integer("p");
    const long long l = tok.integer("l");
    const long long m = tok.integer("m");
    if (n <= 0 || p < 0 || l < 0 || m < 0 || p > n) {
        throw FormatError("problem file: invalid sizes in header");
    }
    std::vector<std::size_t> dims;
    long long total = l;
    for (long long k = 0; k < m; ++k) {
        const long long d = tok.integer("cone dimension");
        if (d < 1) {
            throw FormatError("problem file: cone dimension must be positive");
        }
        dims.push_back(static_cast<std::size_t>(d));
        total += d;
    }
    if (total != n) {
        throw FormatError("problem file: cone dimensions sum to " + std::to_string(total) +
                          " but n = " + std::to_string(n));
    }
    const long long nnz = tok.integer("nnz");
    if (nnz < 0) {
        throw FormatError("problem file: negative nnz");
    }
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(nnz));
    for (long long k = 0; k < nnz; ++k) {
        const long long r = tok.integer("row");
        const long long c = tok.integer("col");
        const double v = tok.real("value");
        if (r < 0 || r >= p || c < 0 || c >= n) {
            throw FormatError("problem file: entry " + std::to_string(k) + " out of range");
        }
        entries.push_back({static_cast<std::int32_t>(r), static_cast<std::int32_t>(c), v});
    }
    SocpProblem prob;
    try {
        prob.layout = ConeLayout(static_cast<std::size_t>(l), dims);
    } catch (const DimensionError& e) {
        throw FormatError(std::string("problem file: ") + e.what());
    }
    prob.A = SparseMat::from_triplets(static_cast<std::int32_t>(p), static_cast<std::int32_t>(n), entries,
                                      false, SparseMat::Zeros::Keep);
    prob.b.resize(static_cast<std::size_t>(p));
    for (auto& v : prob.b) {
        v = tok.real("b");
    }
    prob.c.resize(static_cast<std::size_t>(n));
    for (auto& v : prob.c) {
        v = tok.real("c");
    }
    std::string extra;
    if (in >> extra) {
        throw FormatError("problem file: trailing data '" + extra + "'");
    }
    return prob;
}

void write_problem(std::ostream& out, const SocpProblem& problem)
{
    problem.validate();
    const ConeLayout& layout = problem.layout;
    out << "socp " << layout.dim() << ' ' << problem.p() << ' ' << layout.linear_count() << ' '
        << layout.soc_count() << '\n';
    for (std::size_t k = 0; k < layout.soc_count(); ++k) {
        out << (k ? " " : "") << layout.soc_dim(k);
    }
    out << '\n' << problem.A.nnz() << '\n';
    for (const auto& t : problem.A.to_triplets()) {
        out << t.row << ' ' << t.col << ' ' << format_double(t.value) << '\n';
    }
    for (std::size_t i = 0; i < problem.b.size(); ++i) {
        out << (i ? " " : "") << format_double(problem.b[i]);
    }
    out << '\n';
    for (std::size_t j = 0; j < problem.c.size(); ++j) {
        out << (j ? " " : "") << format_double(problem.c[j]);
    }
    out << '\n';
}

} // namespace socp
