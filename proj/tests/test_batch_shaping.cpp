#include "doctest.h"

#include <set>
#include <sstream>

#include "patchmask/batch_shaping.hpp"
#include "patchmask/error.hpp"

using namespace patchmask;

namespace {

Mask with_visible(std::size_t length, std::size_t visible, Rng& rng) {
    Mask m(length);
    std::fill(m.masked.begin(), m.masked.end(), 1);
    for (std::size_t i : rng.sample_without_replacement(length, visible)) m.masked[i] = 0;
    return m;
}

void check_contract(const std::vector<Mask>& masks, const ShapedBatch& shaped) {
    REQUIRE(shaped.batch == masks.size());
    for (std::size_t i = 0; i < masks.size(); ++i) {
        REQUIRE(shaped.kept_indices[i].size() == shaped.slots);
        REQUIRE(shaped.attention[i].size() == shaped.slots);
        CHECK(shaped.real_count(i) == std::min(masks[i].visible_count(), shaped.slots));
        std::set<std::size_t> seen;
        bool padding_started = false;
        std::size_t previous = 0;
        for (std::size_t s = 0; s < shaped.slots; ++s) {
            const std::size_t idx = shaped.kept_indices[i][s];
            if (!shaped.attention[i][s]) {
                padding_started = true;
                CHECK(idx == shaped.padding_index());
                continue;
            }
            CHECK_FALSE(padding_started);
            REQUIRE(idx < masks[i].length());
            CHECK(masks[i].masked[idx] == 0);
            CHECK(seen.insert(idx).second);
            if (s > 0) CHECK(idx > previous);
            previous = idx;
        }
    }
}

}  // namespace

TEST_CASE("visible slot count") {
    CHECK(visible_slots(196, 0.5) == 98);
    CHECK(visible_slots(196, 0.3) == 137);  // ceil(58.8) = 59 masked
    CHECK(visible_slots(10, 0.3) == 7);
    CHECK_THROWS_AS(visible_slots(10, 1.0), ConfigError);
}

TEST_CASE("drop, pad and pass-through cases") {
    Rng rng(1);
    std::vector<Mask> masks{with_visible(196, 120, rng), with_visible(196, 80, rng), with_visible(196, 98, rng)};
    Rng shape_rng(2);
    const ShapedBatch shaped = shape_batch(masks, 0.5, shape_rng);
    CHECK(shaped.slots == 98);
    CHECK(shaped.real_count(0) == 98);  // 22 dropped
    CHECK(shaped.real_count(1) == 80);  // 18 padding
    CHECK(std::count(shaped.attention[1].begin(), shaped.attention[1].end(), 0) == 18);
    CHECK(shaped.real_count(2) == 98);
    std::vector<std::size_t> visible;
    for (std::size_t p = 0; p < 196; ++p) {
        if (!masks[2].masked[p]) visible.push_back(p);
    }
    CHECK(shaped.kept_indices[2] == visible);
    check_contract(masks, shaped);
}

TEST_CASE("shaping contract on random masks") {
    Rng rng(33);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t length = 4 + rng.uniform_index(200);
        const double beta = 0.05 + 0.9 * rng.uniform01();
        std::vector<Mask> masks;
        for (int i = 0; i < 8; ++i) masks.push_back(with_visible(length, rng.uniform_index(length + 1), rng));
        Rng shape_rng(rng.next());
        const ShapedBatch shaped = shape_batch(masks, beta, shape_rng);
        CHECK(shaped.slots == visible_slots(length, beta));
        check_contract(masks, shaped);
    }
}

TEST_CASE("masks already above beta need no padding") {
    Rng rng(8);
    std::vector<Mask> masks;
    for (int i = 0; i < 10; ++i) masks.push_back(with_visible(196, rng.uniform_index(99), rng));
    Rng shape_rng(1);
    const ShapedBatch shaped = shape_batch(masks, 0.5, shape_rng);
    for (std::size_t i = 0; i < masks.size(); ++i) CHECK(shaped.real_count(i) == masks[i].visible_count());
    for (std::size_t i = 0; i < masks.size(); ++i) {
        if (masks[i].visible_count() == 98) CHECK(shaped.real_count(i) == 98);
    }
}

TEST_CASE("shaping is deterministic given the seed") {
    Rng rng(4);
    std::vector<Mask> masks{with_visible(50, 40, rng), with_visible(50, 45, rng)};
    Rng a(9), b(9);
    const auto sa = shape_batch(masks, 0.5, a);
    const auto sb = shape_batch(masks, 0.5, b);
    CHECK(sa.kept_indices == sb.kept_indices);
    CHECK(sa.attention == sb.attention);
}

TEST_CASE("mismatched mask lengths are rejected") {
    std::vector<Mask> masks{Mask(10), Mask(12)};
    Rng rng(1);
    CHECK_THROWS_AS(shape_batch(masks, 0.5, rng), SizeMismatch);
}

TEST_CASE("gather_slots zero-fills padding and dump format") {
    PatchGrid grid(1, 4, 1, 1);
    for (std::size_t i = 0; i < 4; ++i) grid.patch(i)[0] = static_cast<double>(i + 1);
    Mask m(4);
    m.masked = {0, 1, 1, 1};
    Rng rng(1);
    std::vector<Mask> masks{m};
    const ShapedBatch shaped = shape_batch(masks, 0.5, rng);
    CHECK(gather_slots(grid, shaped, 0) == std::vector<double>{1.0, 0.0});

    std::ostringstream out;
    write_shaped_batch(out, shaped);
    CHECK(out.str() == "kept: 0,4\nattn: 10\n");
}
