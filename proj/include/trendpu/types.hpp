#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace trendpu {

/// Opaque row identifier carried from the dataset file through every stage.
struct ExampleId {
    std::int64_t value = 0;

    friend auto operator<=>(const ExampleId&, const ExampleId&) = default;
};

/// Class labels follow the positive = 0 convention throughout.
enum class Label : std::uint8_t { Positive = 0, Negative = 1 };

constexpr int as_int(Label l) noexcept { return static_cast<int>(l); }

}  // namespace trendpu

template <>
struct std::hash<trendpu::ExampleId> {
    std::size_t operator()(const trendpu::ExampleId& id) const noexcept {
        return std::hash<std::int64_t>{}(id.value);
    }
};
