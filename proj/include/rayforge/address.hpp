#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rayforge {

using Entry = std::int64_t;

/// Eventually periodic external address: prefix followed by a repeating cycle.
///
/// The representation is normalized on construction: the cycle is primitive
/// (not a power of a shorter word) and the prefix does not end with the last
/// cycle entry. Two addresses are equal as sequences iff they compare equal.
class ExternalAddress {
public:
    ExternalAddress(std::vector<Entry> prefix, std::vector<Entry> cycle);

    static ExternalAddress periodic(std::vector<Entry> cycle) { return {{}, std::move(cycle)}; }

    Entry entry(std::size_t i) const;
    Entry operator[](std::size_t i) const { return entry(i); }

    const std::vector<Entry>& prefix() const { return prefix_; }
    const std::vector<Entry>& cycle() const { return cycle_; }
    std::size_t preperiod() const { return prefix_.size(); }
    std::size_t period() const { return cycle_.size(); }
    bool is_periodic() const { return prefix_.empty(); }

    /// sup_n |s_n|; finite for every representable address.
    Entry max_abs_entry() const;

    friend bool operator==(const ExternalAddress&, const ExternalAddress&) = default;

private:
    std::vector<Entry> prefix_;
    std::vector<Entry> cycle_;
};

/// sigma^n s.
ExternalAddress shift(const ExternalAddress& s, std::size_t n = 1);

/// (e s0 s1 ...).
ExternalAddress prepend(Entry e, const ExternalAddress& s);

/// True iff sigma^k a == sigma^l b for some k, l >= 0.
bool overlapping(const ExternalAddress& a, const ExternalAddress& b);

/// Address agreeing with `s` on entries 0..n-1 and continuing with `tail`.
ExternalAddress truncate(const ExternalAddress& s, std::size_t n, const std::vector<Entry>& tail);

/// Parses "s0 s1 ... | c0 c1 ...". The bar is mandatory and the cycle nonempty.
ExternalAddress parse_address(std::string_view text);

/// Inverse of parse_address, e.g. "1 0 | 0" or "| 0 1".
std::string to_string(const ExternalAddress& s);

}  // namespace rayforge
