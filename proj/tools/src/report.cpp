#include "sdae_app/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "sdae/error.hpp"

namespace sdae::app {
namespace {

const std::vector<std::string> kLedgerHeader{
    "cell_id",        "activation", "n_layers",             "n_neurons",
    "corruption_level", "corruption_mode", "seed",         "status",
    "validation_error_pct", "test_error_pct", "epochs_ran", "message"};

std::string digest_line(const std::string& digest) { return "# config_digest: " + digest + "\n"; }

double to_double(const std::string& s, const char* field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw FormatError(std::string("ledger: bad ") + field + " '" + s + "'");
  }
}

template <typename T>
T to_unsigned(const std::string& s, const char* field) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(std::string("ledger: bad ") + field + " '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool at_line_start = true;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (at_line_start && c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    at_line_start = false;
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      at_line_start = true;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw FormatError("csv: unterminated quoted field");
  if (!field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_csv(const std::string& digest, const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::string out = digest_line(digest);
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(fields[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string ledger_csv(std::span<const TrialResult> ledger, const std::string& digest) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& t : ledger) {
    rows.push_back({t.cell.id(),
                    std::string(to_string(t.cell.activation)),
                    std::to_string(t.cell.n_layers),
                    std::to_string(t.cell.n_neurons),
                    format_double(t.cell.corruption_level),
                    std::string(to_string(t.cell.corruption_mode)),
                    std::to_string(t.seed),
                    to_string(t.status),
                    format_double(t.validation_error_pct),
                    t.test_error_pct ? format_double(*t.test_error_pct) : std::string(),
                    std::to_string(t.epochs_ran),
                    t.message});
  }
  return render_csv(digest, kLedgerHeader, rows);
}

std::vector<TrialResult> parse_ledger_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows.front() != kLedgerHeader) throw FormatError("ledger: bad header row");
  std::vector<TrialResult> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != kLedgerHeader.size()) {
      throw FormatError("ledger: row " + std::to_string(i) + " has " + std::to_string(r.size()) +
                        " fields");
    }
    TrialResult t;
    try {
      t.cell.activation = parse_activation(r[1]);
      t.cell.corruption_mode = parse_corruption_mode(r[5]);
      t.status = parse_trial_status(r[7]);
    } catch (const ArgumentError& e) {
      throw FormatError(std::string("ledger: ") + e.what());
    }
    t.cell.n_layers = to_unsigned<std::size_t>(r[2], "n_layers");
    t.cell.n_neurons = to_unsigned<std::size_t>(r[3], "n_neurons");
    t.cell.corruption_level = to_double(r[4], "corruption_level");
    t.seed = to_unsigned<std::uint64_t>(r[6], "seed");
    t.validation_error_pct = to_double(r[8], "validation_error_pct");
    if (!r[9].empty()) t.test_error_pct = to_double(r[9], "test_error_pct");
    t.epochs_ran = to_unsigned<std::size_t>(r[10], "epochs_ran");
    t.message = r[11];
    if (t.cell.id() != r[0]) throw FormatError("ledger: cell_id does not match its fields");
    out.push_back(std::move(t));
  }
  return out;
}

nlohmann::json ledger_json(std::span<const TrialResult> ledger, const std::string& digest) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& t : ledger) {
    cells.push_back({{"cell_id", t.cell.id()},
                     {"activation", to_string(t.cell.activation)},
                     {"n_layers", t.cell.n_layers},
                     {"n_neurons", t.cell.n_neurons},
                     {"corruption_level", t.cell.corruption_level},
                     {"corruption_mode", to_string(t.cell.corruption_mode)},
                     {"seed", t.seed},
                     {"status", to_string(t.status)},
                     {"validation_error_pct", t.validation_error_pct},
                     {"test_error_pct", t.test_error_pct ? nlohmann::json(*t.test_error_pct)
                                                         : nlohmann::json(nullptr)},
                     {"epochs_ran", t.epochs_ran},
                     {"message", t.message}});
  }
  return {{"config_digest", digest}, {"cells", cells}};
}

std::string ledger_timing_csv(std::span<const TrialResult> ledger) {
  std::string out = "cell_id,wall_time_s\n";
  for (const auto& t : ledger) out += csv_escape(t.cell.id()) + "," + format_double(t.wall_time_s) + "\n";
  return out;
}

std::string fig3_csv(const Fig3Table& table, const std::string& digest) {
  std::vector<std::string> header{"activation"};
  for (auto l : table.layer_counts) header.push_back("L" + std::to_string(l));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t r = 0; r < table.activations.size(); ++r) {
    std::vector<std::string> row{std::string(to_string(table.activations[r]))};
    for (const auto& e : table.error_pct[r]) row.push_back(e ? format_double(*e) : "missing");
    rows.push_back(std::move(row));
  }
  return render_csv(digest, header, rows);
}

std::string best_cell_summary(const TrialResult& best, const std::string& digest) {
  std::ostringstream os;
  os << digest_line(digest) << "best_cell: " << best.cell.id() << "\n"
     << "activation: " << to_string(best.cell.activation) << "\n"
     << "n_layers: " << best.cell.n_layers << "\n"
     << "n_neurons: " << best.cell.n_neurons << "\n"
     << "seed: " << best.seed << "\n"
     << "validation_error_pct: " << format_double(best.validation_error_pct) << "\n";
  if (best.test_error_pct) os << "test_error_pct: " << format_double(*best.test_error_pct) << "\n";
  os << "epochs_ran: " << best.epochs_ran << "\n";
  return os.str();
}

std::string history_csv(std::span<const EpochRecord> history, const std::string& digest) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& h : history) {
    rows.push_back({std::to_string(h.epoch), format_double(h.train_loss),
                    format_double(100.0 * h.valid_error)});
  }
  return render_csv(digest, {"epoch", "train_loss", "valid_error_pct"}, rows);
}

std::string pretrain_loss_csv(const std::vector<std::vector<double>>& traces,
                              const std::string& digest) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    for (std::size_t e = 0; e < traces[k].size(); ++e) {
      rows.push_back({std::to_string(k + 1), std::to_string(e + 1), format_double(traces[k][e])});
    }
  }
  return render_csv(digest, {"layer", "epoch", "mean_reconstruction_loss"}, rows);
}

std::string evaluation_report(const Evaluation& ev, std::string_view split,
                              const std::string& digest) {
  std::ostringstream os;
  os << digest_line(digest) << "split: " << split << "\n"
     << "samples: " << ev.total << "\n"
     << "error_rate: " << format_double(ev.error_rate) << "\n"
     << "error_pct: " << format_double(100.0 * ev.error_rate) << "\n"
     << "confusion (rows = true class, columns = predicted):\n";
  for (const auto& row : ev.confusion) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? " " : "") << row[j];
    os << "\n";
  }
  return os.str();
}

std::string confusion_csv(const Evaluation& ev, const std::string& digest) {
  std::vector<std::string> header{"true_class"};
  for (std::size_t j = 0; j < ev.confusion.size(); ++j) header.push_back("pred_" + std::to_string(j));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < ev.confusion.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    for (auto c : ev.confusion[i]) row.push_back(std::to_string(c));
    rows.push_back(std::move(row));
  }
  return render_csv(digest, header, rows);
}

std::string baselines_csv(std::span<const BaselineRow> rows, const std::string& digest) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows) {
    out.push_back({r.model, r.valid_error_pct ? format_double(*r.valid_error_pct) : "", r.status});
  }
  return render_csv(digest, {"model", "validation_error_pct", "status"}, out);
}

std::string baselines_table(std::span<const BaselineRow> rows) {
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.model.size());
  std::ostringstream os;
  os << std::string("Models") << std::string(width - 6 + 2, ' ') << "Validation Error (%)\n";
  for (const auto& r : rows) {
    os << r.model << std::string(width - r.model.size() + 2, ' ');
    if (r.valid_error_pct) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", *r.valid_error_pct);
      os << buf;
    } else {
      os << r.status;
    }
    os << "\n";
  }
  return os.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace sdae::app
