#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace qpwalk::quasiperiodic {

/// Largest index whose Fibonacci number fits in a signed 64-bit integer.
inline constexpr int kMaxFibonacciIndex = 92;

/// l_0 .. l_nmax with l_0 = 0, l_1 = 1, l_{n+1} = l_n + l_{n-1}.
class FibonacciLengths {
public:
    explicit FibonacciLengths(int n_max);

    std::int64_t operator[](std::size_t n) const { return values_.at(n); }
    int n_max() const { return static_cast<int>(values_.size()) - 1; }
    std::span<const std::int64_t> values() const { return values_; }

private:
    std::vector<std::int64_t> values_;
};

FibonacciLengths fibonacci_lengths(int n_max);

/// Fibonacci substitution word over {A, B}.
struct FibonacciWord {
    std::string symbols;
    int generation = 1;

    std::size_t size() const { return symbols.size(); }
};

/// Upper bound on generated word length (symbols).
inline constexpr std::size_t kMaxWordLength = std::size_t{1} << 28;

/// word(1) = "A"; word(g + 1) applies A -> AB, B -> A to word(g).
FibonacciWord fibonacci_word(int generation);

inline constexpr double kGoldenRatio = std::numbers::phi;

/// x(tau) = cos(2 pi tau) + cos(2 pi alpha tau).
struct QuasiperiodicSignal {
    double alpha = kGoldenRatio;
};

double signal_eval(const QuasiperiodicSignal& signal, double tau);

enum class PartitionKind { uniform, fibonacci_word, custom };

/// Strictly increasing times 0 = t_0 < ... < t_N = t_total.
class TimePartition {
public:
    /// Validates monotonicity and the zero start.
    TimePartition(std::vector<double> times, PartitionKind kind);

    std::span<const double> times() const { return times_; }
    std::size_t segments() const { return times_.size() - 1; }
    double total() const { return times_.back(); }
    double increment(std::size_t i) const { return times_[i + 1] - times_[i]; }
    std::vector<double> increments() const;
    PartitionKind kind() const { return kind_; }

private:
    std::vector<double> times_;
    PartitionKind kind_;
};

TimePartition uniform_partition(double t_total, int n_segments);

/// First n_segments symbols mapped to raw durations A -> phi, B -> 1 and
/// rescaled so they sum to t_total.
TimePartition quasiperiodic_partition(double t_total, int n_segments, const FibonacciWord& source);

/// Partition from explicit positive increments; total is their running sum.
TimePartition partition_from_increments(std::span<const double> increments);

const char* to_string(PartitionKind kind);

} // namespace qpwalk::quasiperiodic
