#include "eraselab/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "eraselab/errors.hpp"

namespace eraselab {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("write failed for " + path.string());
}

json formula_to_json(const Formula& f) {
    json shared = json::array();
    for (const auto& entries : f.shared_map) {
        json per_clause = json::array();
        for (const SharedEntry& e : entries) per_clause.push_back({e.first, e.second});
        shared.push_back(per_clause);
    }
    json clauses = json::array();
    for (const Clause& c : f.clauses) clauses.push_back(c.vars);
    return json{{"num_vars", f.num_vars}, {"clauses", clauses}, {"shared_map", shared}};
}

Formula formula_from_json(const json& j) {
    Formula f;
    f.num_vars = j.at("num_vars").get<int>();
    for (const auto& vars : j.at("clauses")) {
        Clause c;
        c.vars = vars.get<std::vector<int>>();
        f.clauses.push_back(std::move(c));
    }
    if (j.contains("shared_map")) {
        for (const auto& per_clause : j.at("shared_map")) {
            std::vector<SharedEntry> entries;
            for (const auto& e : per_clause)
                entries.emplace_back(e.at(0).get<int>(), e.at(1).get<std::vector<int>>());
            f.shared_map.push_back(std::move(entries));
        }
    }
    if (f.shared_map.empty()) f.shared_map.resize(f.clauses.size());
    check_formula(f);
    return f;
}

void save_formula(const std::filesystem::path& path, const Formula& f) {
    write_text_file(path, formula_to_json(f).dump(2) + "\n");
}

Formula load_formula(const std::filesystem::path& path) {
    return formula_from_json(json::parse(read_text_file(path)));
}

void save_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
    std::ostringstream out;
    for (int i = 0; i < ds.num_vars; ++i) out << "bit_" << i << ",";
    out << "label,satisfying_clause\n";
    for (const LabeledSample& s : ds.samples) {
        for (int i = 0; i < ds.num_vars; ++i) out << (s.assignment.is_true(i) ? '1' : '0') << ',';
        out << (s.label ? '1' : '0') << ',';
        if (s.satisfying_clause) out << *s.satisfying_clause;
        out << '\n';
    }
    write_text_file(path, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

Dataset load_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw Error("empty dataset file " + path.string());
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[header.size() - 2] != "label")
        throw Error("unexpected dataset header in " + path.string());
    const int num_vars = static_cast<int>(header.size()) - 2;

    Dataset ds;
    ds.num_vars = num_vars;
    std::set<int> sources;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != num_vars + 2)
            throw Error("bad dataset row in " + path.string());
        LabeledSample s;
        s.assignment.values.resize(static_cast<std::size_t>(num_vars));
        for (int i = 0; i < num_vars; ++i)
            s.assignment.values[static_cast<std::size_t>(i)] = fields[static_cast<std::size_t>(i)] == "1";
        s.label = fields[static_cast<std::size_t>(num_vars)] == "1";
        const std::string& sc = fields[static_cast<std::size_t>(num_vars) + 1];
        if (!sc.empty()) {
            s.satisfying_clause = std::stoi(sc);
            sources.insert(*s.satisfying_clause);
        }
        ds.samples.push_back(std::move(s));
    }
    ds.source_clauses.assign(sources.begin(), sources.end());
    return ds;
}

json snapshot_to_json(const NetworkWeights& w, const SnapshotMeta& meta) {
    json w1 = json::array();
    for (int j = 0; j < w.hidden_dim; ++j) {
        json row = json::array();
        for (int i = 0; i < w.num_vars; ++i) row.push_back(w.w1_at(j, i));
        w1.push_back(std::move(row));
    }
    return json{{"hidden_dim", w.hidden_dim},
                {"num_vars", w.num_vars},
                {"w1", w1},
                {"b1", w.b1},
                {"w2", w.w2},
                {"b2", w.b2},
                {"meta", {{"seed", meta.seed}, {"step_count", meta.step_count}}}};
}

std::pair<NetworkWeights, SnapshotMeta> snapshot_from_json(const json& j) {
    NetworkWeights w;
    w.hidden_dim = j.at("hidden_dim").get<int>();
    w.num_vars = j.at("num_vars").get<int>();
    const auto& w1 = j.at("w1");
    if (static_cast<int>(w1.size()) != w.hidden_dim)
        throw StructuralError("snapshot w1 row count != hidden_dim");
    w.w1.reserve(static_cast<std::size_t>(w.hidden_dim) * w.num_vars);
    for (const auto& row : w1) {
        if (static_cast<int>(row.size()) != w.num_vars)
            throw StructuralError("snapshot w1 row length != num_vars");
        for (const auto& x : row) w.w1.push_back(x.get<double>());
    }
    w.b1 = j.at("b1").get<std::vector<double>>();
    w.w2 = j.at("w2").get<std::vector<double>>();
    w.b2 = j.at("b2").get<double>();
    if (static_cast<int>(w.b1.size()) != w.hidden_dim ||
        static_cast<int>(w.w2.size()) != w.hidden_dim)
        throw StructuralError("snapshot bias/w2 length != hidden_dim");

    SnapshotMeta meta;
    if (j.contains("meta")) {
        meta.seed = j.at("meta").value("seed", std::uint64_t{0});
        meta.step_count = j.at("meta").value("step_count", std::int64_t{0});
    }
    return {std::move(w), meta};
}

void save_snapshot(const std::filesystem::path& path, const NetworkWeights& w,
                   const SnapshotMeta& meta) {
    write_text_file(path, snapshot_to_json(w, meta).dump() + "\n");
}

std::pair<NetworkWeights, SnapshotMeta> load_snapshot(const std::filesystem::path& path) {
    return snapshot_from_json(json::parse(read_text_file(path)));
}

void save_trace_csv(const std::filesystem::path& path, const RecoveryTrace& trace,
                    int first_epoch) {
    std::ostringstream out;
    out << "epoch,target_tpr,control_tpr,target_fpr,control_fpr\n";
    for (int e = 0; e < trace.epochs(); ++e) {
        const auto i = static_cast<std::size_t>(e);
        out << (first_epoch + e) << ',' << format_double(trace.target_tpr[i]) << ','
            << format_double(trace.control_tpr[i]) << ',' << format_double(trace.target_fpr[i])
            << ',' << format_double(trace.control_fpr[i]) << '\n';
    }
    write_text_file(path, out.str());
}

RecoveryTrace load_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error("empty trace file " + path.string());

    RecoveryTrace trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) throw Error("bad trace row in " + path.string());
        trace.target_tpr.push_back(std::stod(fields[1]));
        trace.control_tpr.push_back(std::stod(fields[2]));
        trace.target_fpr.push_back(std::stod(fields[3]));
        trace.control_fpr.push_back(std::stod(fields[4]));
    }
    return trace;
}

} // namespace eraselab
