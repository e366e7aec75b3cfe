#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "andlab/experiments.hpp"
#include "andlab/lattice.hpp"
#include "andlab/spectral.hpp"
#include "oracles.hpp"

using namespace andlab;

namespace {

HamiltonianMatrix free_chain(long long side) {
    Box box = Box::centered(1, Site{0}, side);
    PotentialSpec spec;
    spec.coupling = 0.0;
    return assemble_hamiltonian(box, sample_potential(box, spec, 1), 0.0);
}

}  // namespace

TEST_CASE("centered box enumerates the symmetric window") {
    Box box = Box::centered(1, Site{0}, 5);
    REQUIRE(box.size() == 5);
    REQUIRE(box.side() == 5);
    REQUIRE(box.radius() == 2);
    REQUIRE(box.lo() == Site{-2});
    REQUIRE(box.hi() == Site{2});
    for (long long i = 0; i < 5; ++i) {
        REQUIRE(box.site_at(i) == Site{static_cast<int>(i) - 2});
        REQUIRE(box.index_of(box.site_at(i)) == i);
    }
    auto b = box.boundary_sites();
    REQUIRE(b.size() == 2);
    REQUIRE(b[0] == Site{-2});
    REQUIRE(b[1] == Site{2});
    REQUIRE(box.center_index() == 2);
    REQUIRE(site_string(Site{-2}) == "(-2)");
}

TEST_CASE("two dimensional box: size, boundary, lexicographic order") {
    Box box = Box::centered(2, Site{0, 0}, 3);
    REQUIRE(box.size() == 9);
    REQUIRE(box.boundary_indices().size() == 8);  // all but the center
    REQUIRE_FALSE(box.is_boundary(box.center_index()));
    REQUIRE(box.index_of(Site{-1, -1}) == 0);
    REQUIRE(box.index_of(Site{-1, 0}) == 1);
    REQUIRE(box.index_of(Site{0, -1}) == 3);
    REQUIRE(box.contains(Site{1, 1}));
    REQUIRE_FALSE(box.contains(Site{2, 0}));
    REQUIRE(site_string(Site{1, -1}) == "(1,-1)");
}

TEST_CASE("single site box is its own boundary") {
    Box box = Box::centered(3, Site{1, 2, 3}, 1);
    REQUIRE(box.size() == 1);
    REQUIRE(box.boundary_indices() == std::vector<long long>{0});
    REQUIRE(box.site_at(0) == Site({1, 2, 3}));
}

TEST_CASE("even requested side rounds to the odd window 2*floor(L/2)+1") {
    REQUIRE(Box::centered(1, Site{0}, 4).side() == 5);
    REQUIRE(Box::centered(1, Site{0}, 1).size() == 1);
}

TEST_CASE("box validation failures throw") {
    REQUIRE_THROWS_AS(Box::centered(0, Site{}, 3), Error);
    REQUIRE_THROWS_AS(Box::centered(1, Site{0}, 0), Error);
    REQUIRE_THROWS_AS(Box::centered(1, Site{0, 0}, 3), Error);  // arity mismatch
    REQUIRE_THROWS_AS(Box::corners(1, Site{2}, Site{0}, Site{1}), Error);
    REQUIRE_THROWS_AS(Box::corners(1, Site{0}, Site{4}, Site{9}), Error);  // center outside
    REQUIRE_THROWS_AS(Box::centered(2, Site{0, 0}, 101, 1000), BoxTooLarge);
    try {
        Box::centered(2, Site{0, 0}, 101, 1000);
        FAIL("expected BoxTooLarge");
    } catch (const BoxTooLarge& e) {
        REQUIRE(e.cap == 1000);
    }
}

TEST_CASE("boundary matches the has-a-neighbor-outside definition by brute force") {
    for (const Box& box : {Box::centered(1, Site{3}, 7), Box::centered(2, Site{0, 0}, 9),
                           Box::centered(3, Site{-1, 0, 1}, 5)}) {
        std::set<long long> expect;
        for (long long i = 0; i < box.size(); ++i) {
            Site y = box.site_at(i);
            for (int j = 0; j < box.dim(); ++j) {
                for (int step : {-1, 1}) {
                    Site z = y;
                    z[static_cast<std::size_t>(j)] += step;
                    if (!box.contains(z)) expect.insert(i);
                }
            }
        }
        auto got = box.boundary_indices();
        REQUIRE(std::set<long long>(got.begin(), got.end()) == expect);
        REQUIRE(std::is_sorted(got.begin(), got.end()));
    }
}

TEST_CASE("sup norm distance") {
    REQUIRE(linf_distance(Site{0, 0}, Site{3, -4}) == 4);
    REQUIRE(linf_distance(Site{2}, Site{2}) == 0);
    REQUIRE(linf_distance(Site{1, 1, 1}, Site{0, 5, 1}) == 4);
}

TEST_CASE("uniform potential: support, density sup, determinism") {
    PotentialSpec spec;
    spec.a = 0.0;
    spec.b = 2.0;
    REQUIRE(spec.density_sup() == Catch::Approx(0.5).margin(0));

    Box box = Box::centered(2, Site{0, 0}, 11);
    auto v1 = sample_potential(box, spec, 42);
    auto v2 = sample_potential(box, spec, 42);
    auto v3 = sample_potential(box, spec, 43);
    REQUIRE(v1.values == v2.values);
    REQUIRE(v1.values != v3.values);
    REQUIRE(static_cast<long long>(v1.values.size()) == box.size());
    for (double x : v1.values) {
        REQUIRE(x >= 0.0);
        REQUIRE(x <= 2.0);
    }
    // value_at resolves through the box index
    for (long long i = 0; i < box.size(); ++i)
        REQUIRE(v1.value_at(box.site_at(i)) == v1.values[static_cast<std::size_t>(i)]);

    PotentialSpec bad;
    bad.a = 1.0;
    bad.b = 1.0;
    REQUIRE_THROWS_AS(bad.validate(), Error);
    PotentialSpec neg;
    neg.coupling = -1.0;
    REQUIRE_THROWS_AS(neg.validate(), Error);
}

TEST_CASE("potential realization refuses sites outside its box") {
    Box box = Box::centered(1, Site{0}, 3);
    PotentialSpec spec;
    auto v = sample_potential(box, spec, 0);
    REQUIRE_THROWS_AS(v.value_at(Site{5}), IncompleteRealization);
}

TEST_CASE("hamiltonian assembly on tiny boxes") {
    SECTION("one site: the matrix is the scaled potential value") {
        Box box = Box::centered(1, Site{0}, 1);
        PotentialSpec spec;
        auto v = sample_potential(box, spec, 7);
        auto h = assemble_hamiltonian(box, v, 3.0);
        REQUIRE(h.size() == 1);
        REQUIRE(h.hops.empty());
        REQUIRE(h.diag[0] == Catch::Approx(3.0 * v.values[0]).margin(0));
        REQUIRE(h.dense() == std::vector<double>{h.diag[0]});
    }
    SECTION("two sites, free: pure hop matrix") {
        Box box = Box::corners(1, Site{0}, Site{1}, Site{0});
        PotentialSpec spec;
        spec.coupling = 0.0;
        auto h = assemble_hamiltonian(box, sample_potential(box, spec, 0), 0.0);
        REQUIRE(h.dense() == std::vector<double>{0.0, 1.0, 1.0, 0.0});
    }
    SECTION("three sites: tridiagonal with unit hops") {
        Box box = Box::centered(1, Site{0}, 3);
        PotentialSpec spec;
        auto v = sample_potential(box, spec, 11);
        auto h = assemble_hamiltonian(box, v, 1.0);
        REQUIRE(h.tridiagonal);
        REQUIRE(h.hops == std::vector<std::pair<long long, long long>>{{0, 1}, {1, 2}});
        auto dense = h.dense();
        REQUIRE(dense[0 * 3 + 0] == v.values[0]);
        REQUIRE(dense[1 * 3 + 1] == v.values[1]);
        REQUIRE(dense[1 * 3 + 0] == 1.0);
        REQUIRE(dense[0 * 3 + 1] == 1.0);
        REQUIRE(dense[2 * 3 + 0] == 0.0);
    }
    SECTION("apply agrees with the dense matrix") {
        Box box = Box::centered(2, Site{0, 0}, 5);
        PotentialSpec spec;
        auto h = assemble_hamiltonian(box, sample_potential(box, spec, 3), 1.5);
        const auto n = static_cast<std::size_t>(h.size());
        auto dense = h.dense();
        std::vector<double> x(n), y1(n), y2(n, 0.0);
        Rng rng(99);
        for (auto& xi : x) xi = rng.uniform(-1.0, 1.0);
        h.apply(x.data(), y1.data());
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t r = 0; r < n; ++r) y2[r] += dense[c * n + r] * x[c];
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE(y1[i] == Catch::Approx(y2[i]).margin(1e-12));
    }
}

TEST_CASE("spectrum support endpoints") {
    PotentialSpec u01;  // uniform [0,1], coupling 1
    Interval s1 = spectrum_support(u01, 1);
    REQUIRE(s1.a == Catch::Approx(-2.0).margin(0));
    REQUIRE(s1.b == Catch::Approx(3.0).margin(0));

    PotentialSpec free2;
    free2.coupling = 0.0;
    Interval s2 = spectrum_support(free2, 2);
    REQUIRE(s2.a == Catch::Approx(-4.0).margin(0));
    REQUIRE(s2.b == Catch::Approx(4.0).margin(0));

    PotentialSpec strong;
    strong.coupling = 10.0;
    Interval s3 = spectrum_support(strong, 1);
    REQUIRE(s3.a == Catch::Approx(-2.0).margin(0));
    REQUIRE(s3.b == Catch::Approx(12.0).margin(0));
}

TEST_CASE("interval semantics: open containment, closed covering") {
    Interval j{0.0, 1.0};
    REQUIRE(j.width() == 1.0);
    REQUIRE(j.contains(0.5));
    REQUIRE_FALSE(j.contains(0.0));
    REQUIRE_FALSE(j.contains(1.0));
    REQUIRE(j.covers(Interval{0.0, 1.0}));
    REQUIRE(j.covers(Interval{0.25, 0.75}));
    REQUIRE_FALSE(j.covers(Interval{-0.1, 0.5}));
}

TEST_CASE("scale schedule growth and validation") {
    auto s = scale_schedule(7, 1.5, 2);
    REQUIRE(s.lengths == std::vector<long long>{7, 19, 83});
    REQUIRE(s.length(0) == 7);
    REQUIRE(s.length(2) == 83);
    REQUIRE(s.max_index() == 2);
    REQUIRE_THROWS_AS(s.length(3), Error);
    REQUIRE_THROWS_AS(s.length(-1), Error);

    auto t = scale_schedule(3, 1.3, 1);
    REQUIRE(t.lengths == std::vector<long long>{3, 5});

    REQUIRE_THROWS_AS(scale_schedule(7, 2.5, 2), InvalidExponent);
    REQUIRE_THROWS_AS(scale_schedule(7, 1.0, 2), InvalidExponent);
    REQUIRE_THROWS_AS(scale_schedule(4, 1.5, 2), Error);  // even start
    REQUIRE_THROWS_AS(scale_schedule(1, 1.5, 2), Error);
    try {
        scale_schedule(7, 2.5, 2);
        FAIL("expected InvalidExponent");
    } catch (const InvalidExponent& e) {
        REQUIRE(e.alpha == 2.5);
        REQUIRE(std::string(e.what()).find("(1, 2)") != std::string::npos);
    }

    // lengths past the representable range refuse instead of wrapping
    REQUIRE_THROWS_WITH(scale_schedule(5, 1.9, 8),
                        Catch::Matchers::ContainsSubstring("overflows"));

    // every step is odd, strictly growing, and at least L^alpha - 2
    for (double alpha : {1.1, 1.45, 1.9}) {
        auto sched = scale_schedule(5, alpha, alpha > 1.8 ? 4 : 6);
        for (std::size_t k = 0; k + 1 < sched.lengths.size(); ++k) {
            const double lk = static_cast<double>(sched.lengths[k]);
            const long long nxt = sched.lengths[k + 1];
            REQUIRE(nxt % 2 == 1);
            REQUIRE(nxt > sched.lengths[k]);
            REQUIRE(static_cast<double>(nxt) >= std::pow(lk, alpha) - 2.0);
        }
    }
}

TEST_CASE("splitmix streams: determinism, range, independence") {
    Rng a(123), b(123), c(124);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
    REQUIRE(a.next_u64() != c.next_u64());
    Rng u(5);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform(-1.5, 2.5);
        REQUIRE(x >= -1.5);
        REQUIRE(x < 2.5);
    }
    // derived seeds: distinct across indices and tags, stable across calls
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 64; ++i) seen.insert(trial_seed(9, i));
    for (int t = 0; t < 64; ++t) seen.insert(stream_seed(9, t));
    REQUIRE(seen.size() == 128);
    REQUIRE(trial_seed(9, 3) == trial_seed(9, 3));
    REQUIRE(stream_seed(9, 3) == stream_seed(9, 3));
    REQUIRE(trial_seed(9, 3) != stream_seed(9, 3));
}

TEST_CASE("free chain spectrum: closed form on three sites") {
    auto h = free_chain(3);
    auto s = eigendecompose(h);
    REQUIRE(s.n == 3);
    const double r2 = std::sqrt(2.0);
    REQUIRE(s.eigenvalues[0] == Catch::Approx(-r2).margin(1e-12));
    REQUIRE(s.eigenvalues[1] == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(s.eigenvalues[2] == Catch::Approx(r2).margin(1e-12));
    REQUIRE(min_gap(s) == Catch::Approx(r2).margin(1e-12));
}

TEST_CASE("one site spectrum is the diagonal entry") {
    Box box = Box::centered(1, Site{0}, 1);
    PotentialRealization v{box, {0.5}, 0};
    auto h = assemble_hamiltonian(box, v, 1.0);
    auto w = eigenvalues_of(h);
    REQUIRE(w == std::vector<double>{0.5});
    auto s = eigendecompose(h);
    REQUIRE(s.min_gap() == std::numeric_limits<double>::infinity());
}

TEST_CASE("hundred site free chain matches the closed form to 1e-10") {
    auto h = free_chain(101);  // 101 sites
    auto w = eigenvalues_of(h);
    auto w0 = free_eigenvalues_1d(101);
    REQUIRE(w.size() == w0.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        REQUIRE(w[i] == Catch::Approx(w0[i]).margin(1e-10));
}

TEST_CASE("degenerate spectrum has zero minimal gap") {
    // free 3x3 square: (a,b) and (b,a) modes coincide
    Box box = Box::centered(2, Site{0, 0}, 3);
    PotentialSpec spec;
    spec.coupling = 0.0;
    auto h = assemble_hamiltonian(box, sample_potential(box, spec, 0), 0.0);
    auto s = eigendecompose(h);
    REQUIRE(min_gap(s) < 1e-12);
}

TEST_CASE("eigendecomposition invariants: residuals and orthonormality") {
    Box box = Box::centered(1, Site{0}, 51);
    PotentialSpec spec;
    auto h = assemble_hamiltonian(box, sample_potential(box, spec, 17), 1.0);
    auto s = eigendecompose(h);
    REQUIRE(s.has_vectors);
    REQUIRE(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
    REQUIRE(s.max_residual() < 1e-10 * s.spectral_radius());
    const auto n = static_cast<std::size_t>(s.n);
    for (std::size_t i = 0; i < n; i += 7) {
        for (std::size_t j = i; j < n; j += 11) {
            double dot = 0.0;
            const double* vi = s.vector(static_cast<long long>(i));
            const double* vj = s.vector(static_cast<long long>(j));
            for (std::size_t k = 0; k < n; ++k) dot += vi[k] * vj[k];
            REQUIRE(dot == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-10));
        }
    }
    // dense path must agree with the tridiagonal fast path
    auto dup = h;
    dup.tridiagonal = false;
    auto wd = eigenvalues_of(dup);
    for (std::size_t i = 0; i < n; ++i)
        REQUIRE(wd[i] == Catch::Approx(s.eigenvalues[i]).margin(1e-10));
}

TEST_CASE("library eigenvalues match the characteristic polynomial oracle") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
        Box box = Box::corners(1, Site{0}, Site{7}, Site{0});  // 8 sites
        PotentialSpec spec;
        spec.b = 2.0;
        auto h = assemble_hamiltonian(box, sample_potential(box, spec, seed), 1.0);
        auto w = eigenvalues_of(h);
        auto w0 = oracle::charpoly_eigenvalues(h.dense(), 8);
        REQUIRE(w.size() == 8);
        for (std::size_t i = 0; i < 8; ++i)
            REQUIRE(w[i] == Catch::Approx(w0[i]).margin(1e-8));
    }
}

TEST_CASE("counting eigenvalues in open windows") {
    auto h = free_chain(3);
    auto w = eigenvalues_of(h);
    REQUIRE(count_in_interval(w, Interval{-0.5, 0.5}) == 1);
    REQUIRE(count_in_interval(w, Interval{-2.0, 2.0}) == 3);
    REQUIRE(count_in_interval(w, Interval{2.0, 3.0}) == 0);
    // endpoint exclusion on exactly representable values
    const std::vector<double> grid{-1.0, 0.0, 1.0};
    REQUIRE(count_in_interval(grid, Interval{-1.0, 0.0}) == 0);
    REQUIRE(count_in_interval(grid, Interval{-1.0, 1.0}) == 1);
    REQUIRE(count_in_interval(grid, Interval{-1.5, 1.0}) == 2);
    REQUIRE(count_in_interval(grid, Interval{-1.5, 1.5}) == 3);
}

TEST_CASE("interval eigenpairs agree with a filtered full decomposition") {
    Box box = Box::centered(1, Site{0}, 51);
    PotentialSpec spec;
    auto h = assemble_hamiltonian(box, sample_potential(box, spec, 23), 1.0);
    const Interval j{0.2, 0.9};
    auto pairs = eigenpairs_in_interval(h, j);
    auto s = eigendecompose(h);
    std::vector<double> inside;
    for (double e : s.eigenvalues)
        if (j.contains(e)) inside.push_back(e);
    REQUIRE(pairs.size() == inside.size());
    REQUIRE(static_cast<long long>(pairs.size()) == count_in_interval(s, j));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        REQUIRE(pairs[i].value == Catch::Approx(inside[i]).margin(1e-10));
        REQUIRE(pairs[i].residual < 1e-10 * s.spectral_radius());
        double norm = 0.0;
        for (double x : pairs[i].vector) norm += x * x;
        REQUIRE(std::sqrt(norm) == Catch::Approx(1.0).margin(1e-10));
    }
    // dense path returns the same pairs
    auto dup = h;
    dup.tridiagonal = false;
    auto dpairs = eigenpairs_in_interval(dup, j);
    REQUIRE(dpairs.size() == pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
        REQUIRE(dpairs[i].value == Catch::Approx(pairs[i].value).margin(1e-10));
}

TEST_CASE("distance to spectrum") {
    std::vector<double> w{-1.0, 0.0, 2.0};
    REQUIRE(distance_to_spectrum(w, 0.5) == Catch::Approx(0.5).margin(0));
    REQUIRE(distance_to_spectrum(w, 3.0) == Catch::Approx(1.0).margin(0));
    REQUIRE(distance_to_spectrum(w, -4.0) == Catch::Approx(3.0).margin(0));
    REQUIRE(distance_to_spectrum(w, 0.0) == 0.0);
}

TEST_CASE("green function on a single site is the scalar resolvent") {
    Box box = Box::centered(1, Site{0}, 1);
    PotentialRealization v{box, {0.7}, 0};
    auto h = assemble_hamiltonian(box, v, 2.0);  // matrix is [1.4]
    auto g = greens_element(h, 0.4, Site{0}, Site{0});
    REQUIRE(g.value == Catch::Approx(1.0 / (1.4 - 0.4)).margin(1e-12));
    REQUIRE(g.dist_to_spectrum == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("green function on the free two site system at zero energy") {
    Box box = Box::corners(1, Site{0}, Site{1}, Site{0});
    PotentialSpec spec;
    spec.coupling = 0.0;
    auto h = assemble_hamiltonian(box, sample_potential(box, spec, 0), 0.0);
    // H = [[0,1],[1,0]], (H - 0)^{-1} = H, so G(0; x, y) = 1 - delta_{xy}
    REQUIRE(greens_element(h, 0.0, Site{0}, Site{1}).value ==
            Catch::Approx(1.0).margin(1e-12));
    REQUIRE(greens_element(h, 0.0, Site{0}, Site{0}).value ==
            Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("resolvent refuses energies on the spectrum") {
    auto h = free_chain(3);  // 0 is an eigenvalue
    REQUIRE_THROWS_AS(greens_element(h, 0.0, Site{0}, Site{0}), ResolventSingular);
    REQUIRE_THROWS_AS(greens_to_boundary(h, std::sqrt(2.0), Site{0}), ResolventSingular);
    try {
        greens_element(h, 1e-15, Site{0}, Site{0});
        FAIL("expected ResolventSingular");
    } catch (const ResolventSingular& e) {
        REQUIRE(e.spectrum_distance <= 1e-12 * std::sqrt(2.0));
    }
}

TEST_CASE("resolvent identity and symmetry of the green function") {
    Box box = Box::centered(1, Site{0}, 49);
    PotentialSpec spec;
    auto h = assemble_hamiltonian(box, sample_potential(box, spec, 31), 1.0);
    auto w = eigenvalues_of(h);
    const double e = 5.0;  // far outside [-2, 3]
    const auto n = static_cast<std::size_t>(h.size());

    // (H - E) G(., y) = delta_y
    const Site y{-7};
    std::vector<double> col(n);
    for (long long i = 0; i < h.size(); ++i)
        col[static_cast<std::size_t>(i)] =
            greens_element(h, e, box.site_at(i), y, kDefaultTauSpec, &w).value;
    std::vector<double> hv(n);
    h.apply(col.data(), hv.data());
    for (std::size_t i = 0; i < n; ++i) {
        const double want =
            (static_cast<long long>(i) == box.index_of(y)) ? 1.0 : 0.0;
        REQUIRE(hv[i] - e * col[i] == Catch::Approx(want).margin(1e-10));
    }

    // G(x, y) = G(y, x)
    for (int x : {-24, -3, 0, 11, 24})
        REQUIRE(greens_element(h, e, Site{x}, y, kDefaultTauSpec, &w).value ==
                Catch::Approx(greens_element(h, e, y, Site{x}, kDefaultTauSpec, &w).value)
                    .margin(1e-10));
}

TEST_CASE("boundary greens row matches elementwise queries and a dense inverse") {
    Box box = Box::centered(2, Site{0, 0}, 5);
    PotentialSpec spec;
    spec.coupling = 10.0;
    auto h = assemble_hamiltonian(box, sample_potential(box, spec, 5), 10.0);
    auto w = eigenvalues_of(h);
    const double e = -3.0;
    auto row = greens_to_boundary(h, e, box.center(), kDefaultTauSpec, &w);
    REQUIRE(row.size() == box.boundary_indices().size());

    const int n = static_cast<int>(h.size());
    auto shifted = h.dense();
    for (int i = 0; i < n; ++i) shifted[static_cast<std::size_t>(i * n + i)] -= e;
    auto inv = oracle::dense_inverse(shifted, n);
    const long long cx = box.center_index();
    for (const auto& g : row) {
        const long long bi = box.index_of(g.target);
        REQUIRE(g.value ==
                Catch::Approx(inv[static_cast<std::size_t>(bi * n + cx)]).margin(1e-10));
        REQUIRE(g.value ==
                Catch::Approx(greens_element(h, e, box.center(), g.target,
                                             kDefaultTauSpec, &w)
                                  .value)
                    .margin(1e-12));
    }
}

TEST_CASE("spectrum summary experiment reports free oracle deviation") {
    Box box = Box::centered(1, Site{0}, 101);
    PotentialSpec spec;
    spec.coupling = 0.0;
    auto sum = run_spectrum(box, spec, 9);
    REQUIRE(sum.free_oracle);
    REQUIRE(sum.max_dev_free < 1e-10);
    REQUIRE(sum.min_eigenvalue == Catch::Approx(-2.0).margin(1e-2));
    REQUIRE(sum.max_eigenvalue == Catch::Approx(2.0).margin(1e-2));
    REQUIRE(sum.min_gap > 0.0);
}
