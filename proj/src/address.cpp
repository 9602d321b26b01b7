#include <rayforge/address.hpp>
#include <rayforge/error.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <sstream>

namespace rayforge {

namespace {

std::vector<Entry> primitive_root(const std::vector<Entry>& cycle)
{
    const std::size_t n = cycle.size();
    for (std::size_t p = 1; p < n; ++p) {
        if (n % p != 0) continue;
        bool repeats = true;
        for (std::size_t i = p; i < n && repeats; ++i) repeats = cycle[i] == cycle[i - p];
        if (repeats) return {cycle.begin(), cycle.begin() + static_cast<std::ptrdiff_t>(p)};
    }
    return cycle;
}

std::vector<Entry> parse_entries(std::string_view text)
{
    std::vector<Entry> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == ','))
            ++pos;
        if (pos >= text.size()) break;
        std::size_t end = pos;
        while (end < text.size() && text[end] != ' ' && text[end] != '\t' && text[end] != ',') ++end;
        Entry value{};
        const char* first = text.data() + pos;
        const char* last = text.data() + end;
        if (*first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last)
            throw Error(ErrorCode::ParseError,
                        "address entry '" + std::string(text.substr(pos, end - pos)) + "' is not an integer");
        out.push_back(value);
        pos = end;
    }
    return out;
}

}  // namespace

ExternalAddress::ExternalAddress(std::vector<Entry> prefix, std::vector<Entry> cycle)
    : prefix_(std::move(prefix)), cycle_(std::move(cycle))
{
    if (cycle_.empty()) throw Error(ErrorCode::InvalidArgument, "address cycle must be nonempty");
    cycle_ = primitive_root(cycle_);
    // Absorb trailing prefix entries that already belong to the cycle.
    while (!prefix_.empty() && prefix_.back() == cycle_.back()) {
        prefix_.pop_back();
        std::rotate(cycle_.rbegin(), cycle_.rbegin() + 1, cycle_.rend());
    }
}

Entry ExternalAddress::entry(std::size_t i) const
{
    if (i < prefix_.size()) return prefix_[i];
    return cycle_[(i - prefix_.size()) % cycle_.size()];
}

Entry ExternalAddress::max_abs_entry() const
{
    Entry m = 0;
    for (Entry e : prefix_) m = std::max<Entry>(m, std::abs(e));
    for (Entry e : cycle_) m = std::max<Entry>(m, std::abs(e));
    return m;
}

ExternalAddress shift(const ExternalAddress& s, std::size_t n)
{
    if (n == 0) return s;
    const auto& prefix = s.prefix();
    if (n <= prefix.size())
        return {{prefix.begin() + static_cast<std::ptrdiff_t>(n), prefix.end()}, s.cycle()};
    std::vector<Entry> cycle = s.cycle();
    const std::size_t r = (n - prefix.size()) % cycle.size();
    std::rotate(cycle.begin(), cycle.begin() + static_cast<std::ptrdiff_t>(r), cycle.end());
    return ExternalAddress::periodic(std::move(cycle));
}

ExternalAddress prepend(Entry e, const ExternalAddress& s)
{
    std::vector<Entry> prefix{e};
    prefix.insert(prefix.end(), s.prefix().begin(), s.prefix().end());
    return {std::move(prefix), s.cycle()};
}

bool overlapping(const ExternalAddress& a, const ExternalAddress& b)
{
    // Beyond the prefixes every shift is a rotation of the cycle, so the
    // periodic tails of a and b must coincide up to rotation.
    if (a.period() != b.period()) return false;
    const ExternalAddress tail_a = shift(a, a.preperiod());
    for (std::size_t q = 0; q < b.period(); ++q)
        if (shift(b, b.preperiod() + q) == tail_a) return true;
    return false;
}

ExternalAddress truncate(const ExternalAddress& s, std::size_t n, const std::vector<Entry>& tail)
{
    std::vector<Entry> prefix(n);
    for (std::size_t i = 0; i < n; ++i) prefix[i] = s.entry(i);
    return {std::move(prefix), tail};
}

ExternalAddress parse_address(std::string_view text)
{
    const auto bar = text.find('|');
    if (bar == std::string_view::npos)
        throw Error(ErrorCode::ParseError, "address '" + std::string(text) + "' lacks the '|' separator");
    if (text.find('|', bar + 1) != std::string_view::npos)
        throw Error(ErrorCode::ParseError, "address '" + std::string(text) + "' has more than one '|'");
    auto prefix = parse_entries(text.substr(0, bar));
    auto cycle = parse_entries(text.substr(bar + 1));
    if (cycle.empty())
        throw Error(ErrorCode::ParseError, "address '" + std::string(text) + "' has an empty cycle");
    return {std::move(prefix), std::move(cycle)};
}

std::string to_string(const ExternalAddress& s)
{
    std::ostringstream out;
    for (Entry e : s.prefix()) out << e << ' ';
    out << '|';
    for (Entry e : s.cycle()) out << ' ' << e;
    return out.str();
}

}  // namespace rayforge
