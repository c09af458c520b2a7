#include <doctest.h>

#include <cstdlib>

#include "hortonlab/campaign.hpp"
#include "hortonlab/samplers.hpp"
#include "hortonlab/statistics.hpp"

using namespace hortonlab;

namespace {

Accumulator run(int workers) {
    auto pp = CriticalTokunagaParams{}.expand();
    HbpSampler s(pp);
    const std::vector<double> grid{0.5, 1.0};
    return run_indexed(3000, workers, Accumulator{}, [&](std::uint64_t i, Accumulator& acc) {
        Rng rng = make_stream(9, i);
        const Tree t = s.sample_order(1 + static_cast<int>(i % 5), rng);
        accumulate_tokunaga(acc, branch_decompose(t, horton_orders(t)));
        accumulate_width(acc, t, grid);
        acc.count("trees");
    });
}

}  // namespace

TEST_CASE("stream seeds depend only on seed and index") {
    CHECK(stream_seed(1, 0) != stream_seed(1, 1));
    CHECK(stream_seed(1, 0) != stream_seed(2, 0));
    CHECK(stream_seed(5, 7) == stream_seed(5, 7));
}

TEST_CASE("campaign results do not depend on the worker count") {
    const auto one = run(1);
    CHECK(one.counts("trees") == 3000);
    CHECK(run(3) == one);
    CHECK(run(8) == one);
}

TEST_CASE("campaign errors propagate") {
    CHECK_THROWS_AS(run_indexed(1000, 2, Accumulator{}, [](std::uint64_t i, Accumulator&) {
                        if (i == 500) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
}

TEST_CASE("worker count from the environment") {
    setenv("HORTONLAB_WORKERS", "3", 1);
    CHECK(worker_count() == 3);
    setenv("HORTONLAB_WORKERS", "junk", 1);
    CHECK(worker_count() == 1);
    unsetenv("HORTONLAB_WORKERS");
    CHECK(worker_count() == 1);
}
