#include "qpwalk/quasiperiodic.hpp"

#include "qpwalk/error.hpp"

#include <cmath>
#include <string>

namespace qpwalk::quasiperiodic {

FibonacciLengths::FibonacciLengths(int n_max) {
    if (n_max < 0) {
        throw DomainError("n_max must be non-negative");
    }
    if (n_max > kMaxFibonacciIndex) {
        throw DomainError("l_" + std::to_string(n_max) + " overflows 64-bit integers (max index " +
                          std::to_string(kMaxFibonacciIndex) + ")");
    }
    values_.reserve(static_cast<std::size_t>(n_max) + 1);
    values_.push_back(0);
    if (n_max >= 1) {
        values_.push_back(1);
    }
    for (int n = 2; n <= n_max; ++n) {
        values_.push_back(values_[n - 1] + values_[n - 2]);
    }
}

FibonacciLengths fibonacci_lengths(int n_max) { return FibonacciLengths(n_max); }

FibonacciWord fibonacci_word(int generation) {
    if (generation < 1) {
        throw DomainError("Fibonacci word generation must be >= 1");
    }
    // |word(g)| = l_{g+1}; check before allocating.
    if (generation + 1 > kMaxFibonacciIndex ||
        static_cast<std::size_t>(FibonacciLengths(generation + 1)[generation + 1]) > kMaxWordLength) {
        throw DomainError("Fibonacci word of generation " + std::to_string(generation) +
                          " exceeds the length budget");
    }
    std::string word = "A";
    for (int g = 1; g < generation; ++g) {
        std::string next;
        next.reserve(word.size() * 2);
        for (char c : word) {
            if (c == 'A') {
                next += "AB";
            } else {
                next += 'A';
            }
        }
        word = std::move(next);
    }
    return FibonacciWord{std::move(word), generation};
}

double signal_eval(const QuasiperiodicSignal& signal, double tau) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return std::cos(two_pi * tau) + std::cos(two_pi * signal.alpha * tau);
}

TimePartition::TimePartition(std::vector<double> times, PartitionKind kind)
    : times_(std::move(times)), kind_(kind) {
    if (times_.size() < 2) {
        throw DomainError("a time partition needs at least one segment");
    }
    if (times_.front() != 0.0) {
        throw DomainError("a time partition must start at 0");
    }
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!std::isfinite(times_[i]) || !(times_[i] > times_[i - 1])) {
            throw DomainError("partition times must be finite and strictly increasing (index " +
                              std::to_string(i) + ")");
        }
    }
}

std::vector<double> TimePartition::increments() const {
    std::vector<double> out(segments());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = increment(i);
    }
    return out;
}

namespace {

// Cumulative times from raw durations, scaled to t_total, with the last time
// pinned to t_total exactly.
std::vector<double> scaled_times(std::span<const double> raw, double t_total) {
    double raw_sum = 0.0;
    for (double d : raw) {
        raw_sum += d;
    }
    std::vector<double> times(raw.size() + 1, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        acc += raw[i];
        times[i + 1] = t_total * (acc / raw_sum);
    }
    times.back() = t_total;
    return times;
}

void check_total(double t_total) {
    if (!std::isfinite(t_total) || !(t_total > 0.0)) {
        throw DomainError("partition length must be positive and finite");
    }
}

} // namespace

TimePartition uniform_partition(double t_total, int n_segments) {
    check_total(t_total);
    if (n_segments < 1) {
        throw DomainError("partition needs at least one segment");
    }
    std::vector<double> times(static_cast<std::size_t>(n_segments) + 1);
    for (int i = 0; i <= n_segments; ++i) {
        times[i] = t_total * (static_cast<double>(i) / n_segments);
    }
    times.back() = t_total;
    return TimePartition(std::move(times), PartitionKind::uniform);
}

TimePartition quasiperiodic_partition(double t_total, int n_segments, const FibonacciWord& source) {
    check_total(t_total);
    if (n_segments < 1) {
        throw DomainError("partition needs at least one segment");
    }
    if (static_cast<std::size_t>(n_segments) > source.size()) {
        throw DomainError("requested " + std::to_string(n_segments) + " segments but the word has only " +
                          std::to_string(source.size()) + " symbols");
    }
    std::vector<double> raw(static_cast<std::size_t>(n_segments));
    for (int i = 0; i < n_segments; ++i) {
        const char c = source.symbols[i];
        if (c == 'A') {
            raw[i] = kGoldenRatio;
        } else if (c == 'B') {
            raw[i] = 1.0;
        } else {
            throw DomainError(std::string("unexpected symbol '") + c + "' in Fibonacci word");
        }
    }
    return TimePartition(scaled_times(raw, t_total), PartitionKind::fibonacci_word);
}

TimePartition partition_from_increments(std::span<const double> increments) {
    if (increments.empty()) {
        throw DomainError("partition needs at least one segment");
    }
    std::vector<double> times(increments.size() + 1, 0.0);
    for (std::size_t i = 0; i < increments.size(); ++i) {
        if (!std::isfinite(increments[i]) || !(increments[i] > 0.0)) {
            throw DomainError("partition increments must be positive");
        }
        times[i + 1] = times[i] + increments[i];
    }
    return TimePartition(std::move(times), PartitionKind::custom);
}

const char* to_string(PartitionKind kind) {
    switch (kind) {
    case PartitionKind::uniform:
        return "uniform";
    case PartitionKind::fibonacci_word:
        return "fibonacci_word";
    case PartitionKind::custom:
        return "custom";
    }
    return "unknown";
}

} // namespace qpwalk::quasiperiodic
