#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bsgaps/errors.hpp"

// Exact integer/rational linear algebra for the lattice-geometry layer.
// Everything here is small (d <= 4, entries bounded by the enumeration radii),
// so 64-bit values with __int128 intermediates are plenty; overflow guards
// throw rather than wrap.

namespace bsgaps {

using IntVec = std::vector<long long>;
using IntMat = std::vector<IntVec>; // rows

using int128 = __int128;

long long checked_ll(int128 v, const char* where);

long long gcd_ll(long long a, long long b);
bool lex_less(const IntVec& a, const IntVec& b);
bool is_zero(const IntVec& v);
IntVec negate(const IntVec& v);

// first nonzero coordinate made positive
void sign_normalize(IntVec& v);

// divide by the gcd of the entries and sign-normalize; zero vector unchanged
void primitivize(IntVec& v);

int128 dot_exact(const IntVec& a, const IntVec& b);
int128 norm2_exact(const IntVec& v);
double norm(const IntVec& v);

// det(M) for a square integer matrix, fraction-free (Bareiss)
int128 det_exact(std::vector<std::vector<int128>> m);

// det(Gram) = det(M^T M) for a list of integer vectors; 0 iff dependent
int128 gram_det_exact(const IntMat& vectors);

int rank_int(const IntMat& rows);

// Hermite normal form of the row lattice: canonical basis, pivots positive,
// entries above each pivot reduced into [0, pivot). Zero rows dropped.
IntMat hnf_rows(IntMat rows);

// Basis of {x in Z^c : M x = 0} for an r x c integer matrix M (rows given).
// The result is saturated (it is a direct summand), in HNF.
IntMat kernel_lattice(const IntMat& rows_rxc);

// Saturation of the lattice spanned by the given rows: span_Q(rows) meet Z^d.
IntMat saturate_rows(const IntMat& rows);

// exact rationals on long long with __int128 intermediates
struct Rat {
    long long num = 0;
    long long den = 1;
    Rat() = default;
    Rat(long long n);
    Rat(long long n, long long d);
    bool is_zero() const { return num == 0; }
    bool is_integer() const { return den == 1; }
};
Rat rat_add(const Rat& a, const Rat& b);
Rat rat_sub(const Rat& a, const Rat& b);
Rat rat_mul(const Rat& a, const Rat& b);
Rat rat_div(const Rat& a, const Rat& b);

// coordinates c with sum_i c_i * rows_i = v, if v lies in the rational row
// span; nullopt otherwise. rows need not be square.
std::optional<std::vector<Rat>> rational_coordinates(const IntMat& rows, const IntVec& v);

// all m in Z^d with |m| <= r, lexicographically sorted
std::vector<IntVec> enumerate_ball(int d, double r);

// all nonzero lattice vectors sum c_i basis_i with Euclidean norm <= r;
// basis rows must be independent. Sorted by (norm, lex).
std::vector<IntVec> enumerate_lattice_ball(const IntMat& basis, double r);

// greedy pairwise size reduction, keeps the lattice, shortens the basis
void lagrange_reduce(IntMat& basis);

std::string format_intvec(const IntVec& v);

} // namespace bsgaps
