#include "entrobound/spec_file.hpp"

#include "entrobound/bounds.hpp"
#include "entrobound/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace entrobound {

namespace {

struct Entry {
    std::string value;
    std::size_t offset = 0;  // byte offset of the value
};

bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

// Trims in place and shifts `offset` by the characters dropped on the left.
std::string_view trim(std::string_view s, std::size_t& offset)
{
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
        ++offset;
    }
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

const std::map<std::string, std::set<std::string>>& known_keys()
{
    static const std::map<std::string, std::set<std::string>> keys{
        {"system", {"n", "t0", "breakpoints"}},
        {"initial_set", {"lower", "upper"}},
        {"partition", {"blocks", "local_norms", "network_norm"}},
        {"horizon", {"t_max", "dt", "tail_fraction", "t1_list"}},
        {"sampling", {"ensemble", "convex_combos", "seed"}},
        {"bounds", {"results", "norm"}},
        {"empirical", {"eps", "horizons", "resolution", "candidate_budget", "max_candidates", "metric_samples"}},
        {"verify", {"slack", "T", "pairs", "mc_samples", "t1"}},
        {"superset", {"lower", "upper"}},
    };
    return keys;
}

bool is_field_key(std::string_view key)
{
    if (key.size() < 2 || key[0] != 'f') return false;
    return std::all_of(key.begin() + 1, key.end(), [](char c) { return c >= '0' && c <= '9'; });
}

double parse_real(std::string_view s, std::size_t offset)
{
    std::size_t off = offset;
    s = trim(s, off);
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && s.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (s.empty() || ec != std::errc() || ptr != last) throw ParseError("expected a real number", off);
    return v;
}

long long parse_integer(std::string_view s, std::size_t offset)
{
    std::size_t off = offset;
    s = trim(s, off);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("expected an integer", off);
    return v;
}

std::vector<std::pair<std::string_view, std::size_t>> split_list(std::string_view text, std::size_t base)
{
    std::vector<std::pair<std::string_view, std::size_t>> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = text.find(',', start);
        const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        std::size_t off = base + start;
        const auto t = trim(piece, off);
        if (t.empty()) throw ParseError("empty list element", off);
        out.emplace_back(t, off);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

class Reader {
public:
    explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

    [[nodiscard]] const Entry* find(const std::string& key) const
    {
        auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second;
    }
    [[nodiscard]] const Entry& require(const std::string& key, std::size_t eof) const
    {
        const Entry* e = find(key);
        if (!e) throw ParseError("missing key " + key, eof);
        return *e;
    }
    void real(const std::string& key, double& out) const
    {
        if (const Entry* e = find(key)) out = parse_real(e->value, e->offset);
    }
    template <class Int>
    void integer(const std::string& key, Int& out, long long min_value) const
    {
        if (const Entry* e = find(key)) {
            const auto v = parse_integer(e->value, e->offset);
            if (v < min_value) throw ParseError(key + " must be at least " + std::to_string(min_value), e->offset);
            out = static_cast<Int>(v);
        }
    }
    void reals(const std::string& key, std::vector<double>& out) const
    {
        if (const Entry* e = find(key)) out = parse_real_list(e->value, e->offset);
    }

private:
    std::map<std::string, Entry> entries_;
};

BoxSet read_box(const Reader& r, const std::string& section, std::size_t eof, int n)
{
    const Entry& lo = r.require(section + ".lower", eof);
    const Entry& hi = r.require(section + ".upper", eof);
    auto lower = parse_real_list(lo.value, lo.offset);
    auto upper = parse_real_list(hi.value, hi.offset);
    if (static_cast<int>(lower.size()) != n) throw ParseError(section + ".lower must have n entries", lo.offset);
    if (static_cast<int>(upper.size()) != n) throw ParseError(section + ".upper must have n entries", hi.offset);
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] < upper[i])) throw ParseError(section + " needs lower < upper in every coordinate", hi.offset);
    return BoxSet(std::move(lower), std::move(upper));
}

Norm read_norm(std::string_view text, std::size_t offset)
{
    try {
        return parse_norm(text);
    } catch (const Error&) {
        throw ParseError("unknown norm '" + std::string(text) + "'", offset);
    }
}

std::string strip_offset_suffix(const std::string& what)
{
    const auto p = what.rfind(" (at byte ");
    return p == std::string::npos ? what : what.substr(0, p);
}

}  // namespace

std::vector<double> parse_real_list(std::string_view text, std::size_t base)
{
    std::vector<double> out;
    for (const auto& [piece, off] : split_list(text, base)) out.push_back(parse_real(piece, off));
    return out;
}

SpecFile parse_spec(std::string_view text)
{
    std::map<std::string, Entry> entries;
    std::string section;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        std::size_t off = pos;
        line = trim(line, off);
        if (!line.empty()) {
            if (line.front() == '[') {
                if (line.back() != ']') throw ParseError("unterminated section header", off);
                std::size_t name_off = off + 1;
                section = std::string(trim(line.substr(1, line.size() - 2), name_off));
                if (!known_keys().contains(section)) throw ParseError("unknown section [" + section + "]", name_off);
            } else {
                const auto eq = line.find('=');
                if (eq == std::string_view::npos) throw ParseError("expected key = value", off);
                std::size_t key_off = off;
                const std::string key(trim(line.substr(0, eq), key_off));
                std::size_t value_off = off + eq + 1;
                const auto value = trim(line.substr(eq + 1), value_off);
                if (section.empty()) throw ParseError("key outside any section", key_off);
                const bool known = known_keys().at(section).contains(key) || (section == "system" && is_field_key(key));
                if (!known) throw ParseError("unknown key " + section + "." + key, key_off);
                if (value.empty()) throw ParseError("empty value for " + key, value_off);
                const auto full = section + "." + key;
                if (entries.contains(full)) throw ParseError("duplicate key " + full, key_off);
                entries.emplace(full, Entry{std::string(value), value_off});
            }
        }
        pos = end + 1;
    }
    const std::size_t eof = text.size();
    const Reader r(std::move(entries));

    SpecFile spec;
    const Entry& n_entry = r.require("system.n", eof);
    const auto n_value = parse_integer(n_entry.value, n_entry.offset);
    if (n_value < 1 || n_value > 64) throw ParseError("n must be between 1 and 64", n_entry.offset);
    const int n = static_cast<int>(n_value);
    double t0 = 0.0;
    r.real("system.t0", t0);
    std::vector<double> breakpoints;
    r.reals("system.breakpoints", breakpoints);

    std::vector<std::size_t> field_offsets;
    for (int i = 1; i <= n; ++i) {
        const Entry& f = r.require("system.f" + std::to_string(i), eof);
        spec.fields.push_back(f.value);
        field_offsets.push_back(f.offset);
    }
    for (int i = n + 1; i <= n + 64; ++i)
        if (const Entry* extra = r.find("system.f" + std::to_string(i)))
            throw ParseError("field f" + std::to_string(i) + " exceeds n", extra->offset);

    const BoxSet k = read_box(r, "initial_set", eof, n);

    std::optional<Partition> partition;
    if (const Entry* b = r.find("partition.blocks")) {
        std::vector<int> sizes;
        for (const auto& [piece, off] : split_list(b->value, b->offset)) {
            const auto v = parse_integer(piece, off);
            if (v < 1) throw ParseError("block sizes must be positive", off);
            sizes.push_back(static_cast<int>(v));
        }
        std::vector<Norm> local{Norm::Inf};
        if (const Entry* l = r.find("partition.local_norms")) {
            local.clear();
            for (const auto& [piece, off] : split_list(l->value, l->offset)) local.push_back(read_norm(piece, off));
        }
        Norm network = Norm::Inf;
        if (const Entry* nn = r.find("partition.network_norm")) network = read_norm(nn->value, nn->offset);
        try {
            partition = Partition(sizes, local, network);
        } catch (const PreconditionError& e) {
            throw ParseError(e.what(), b->offset);
        }
        if (partition->dimension() != n) throw ParseError("block sizes must sum to n", b->offset);
    } else if (r.find("partition.local_norms") || r.find("partition.network_norm")) {
        throw ParseError("partition norms given without blocks", eof);
    }

    try {
        spec.system = build_system(spec.fields, breakpoints, partition, k, t0);
    } catch (const ParseError& e) {
        // Expressions are parsed field by field; find the failing one.
        for (std::size_t i = 0; i < spec.fields.size(); ++i) {
            try {
                (void)parse_expression(spec.fields[i], n);
            } catch (const ParseError& inner) {
                throw ParseError(strip_offset_suffix(inner.what()), field_offsets[i] + inner.offset());
            }
        }
        throw;
    } catch (const PreconditionError& e) {
        throw ParseError(e.what(), eof);
    }

    auto& h = spec.horizon;
    r.real("horizon.t_max", h.t_max);
    r.real("horizon.dt", h.dt);
    r.real("horizon.tail_fraction", h.tail_fraction);
    r.reals("horizon.t1_list", h.t1_list);
    if (const Entry* e = r.find("horizon.t_max"); e && !(h.t_max > t0)) throw ParseError("t_max must exceed t0", e->offset);
    if (!r.find("horizon.t_max") && !(h.t_max > t0)) h.t_max = t0 + 20.0;
    if (const Entry* e = r.find("horizon.dt"); e && !(h.dt > 0.0)) throw ParseError("dt must be positive", e->offset);
    if (const Entry* e = r.find("horizon.tail_fraction"); e && !(h.tail_fraction > 0.0 && h.tail_fraction < 1.0))
        throw ParseError("tail_fraction must lie in (0, 1)", e->offset);
    r.integer("sampling.ensemble", h.ensemble, 2);
    r.integer("sampling.convex_combos", h.combos, 0);
    r.integer("sampling.seed", h.seed, 0);

    spec.results = {"measure_inf", "trace", "metzler"};
    if (const Entry* e = r.find("bounds.results")) {
        spec.results.clear();
        for (const auto& [piece, off] : split_list(e->value, e->offset)) {
            const auto& ids = result_ids();
            if (std::find(ids.begin(), ids.end(), piece) == ids.end())
                throw ParseError("unknown result id '" + std::string(piece) + "'", off);
            spec.results.emplace_back(piece);
        }
    }
    if (const Entry* e = r.find("bounds.norm")) spec.norm = read_norm(e->value, e->offset);

    auto& em = spec.empirical;
    r.reals("empirical.eps", em.eps);
    r.reals("empirical.horizons", em.horizons);
    r.real("empirical.resolution", em.resolution);
    r.integer("empirical.candidate_budget", em.candidate_budget, 1);
    r.integer("empirical.max_candidates", em.max_candidates, 1);
    r.integer("empirical.metric_samples", em.metric_samples, 2);

    auto& v = spec.verify;
    r.real("verify.slack", v.slack);
    r.real("verify.T", v.horizon);
    r.integer("verify.pairs", v.pairs, 1);
    r.integer("verify.mc_samples", v.mc_samples, 100);
    if (const Entry* e = r.find("verify.t1")) v.t1 = parse_real(e->value, e->offset);

    if (r.find("superset.lower") || r.find("superset.upper")) spec.superset = read_box(r, "superset", eof, n);
    return spec;
}

SpecFile load_spec(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open spec file " + path.string(), 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

}  // namespace entrobound
