#include "bpmisac/plot_script.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "bpmisac/config.hpp"

namespace bpmisac {

namespace {

struct FigureSpec {
  std::vector<std::string> columns;
  std::string body;
};

const std::map<std::string, FigureSpec>& figures() {
  static const std::map<std::string, FigureSpec> table = {
      {"ber",
       {{"method", "mu", "ebn0_db", "ber"},
        R"py(for (method, mu), g in df.groupby(["method", "mu"]):
    g = g.sort_values("ebn0_db")
    ax.semilogy(g["ebn0_db"], g["ber"].clip(lower=1e-7), marker="o", label=f"{method}, mu={mu}")
ax.set_xlabel("Eb/N0 (dB)")
ax.set_ylabel("BER")
)py"}},
      {"tradeoff",
       {{"method", "mu", "ber", "beampattern_mse"},
        R"py(for method, g in df.groupby("method"):
    g = g.sort_values("mu")
    ax.semilogy(g["beampattern_mse"], g["ber"].clip(lower=1e-7), marker="o", label=method)
ax.set_xlabel("beampattern MSE")
ax.set_ylabel("BER")
)py"}},
      {"doa",
       {{"mu", "sensing_snr_db", "rmse_deg", "crb_deg"},
        R"py(for mu, g in df.groupby("mu"):
    g = g.sort_values("sensing_snr_db")
    ax.semilogy(g["sensing_snr_db"], g["rmse_deg"], marker="o", label=f"RMSE, mu={mu}")
    ax.semilogy(g["sensing_snr_db"], g["crb_deg"], linestyle="--", label=f"sqrt(CRB), mu={mu}")
ax.set_xlabel("sensing SNR (dB)")
ax.set_ylabel("DoA error (deg)")
)py"}},
      {"convergence",
       {{"mu", "n_tx", "iteration", "objective"},
        R"py(for (mu, n_tx), g in df.groupby(["mu", "n_tx"]):
    m = g.groupby("iteration")["objective"].mean()
    ax.plot(m.index, m.values, marker="o", label=f"mu={mu}, Nt={n_tx}")
ax.set_xlabel("iteration")
ax.set_ylabel("beampattern MSE objective")
)py"}},
      {"apep",
       {{"ebn0_db", "apep", "apep_floor"},
        R"py(ax.semilogy(df["ebn0_db"], df["apep"], marker="o", label="APEP")
ax.semilogy(df["ebn0_db"], df["apep_floor"], linestyle="--", label="floor")
ax.set_xlabel("Eb/N0 (dB)")
ax.set_ylabel("BER")
)py"}},
      {"design",
       {{"method", "mu", "beampattern_mse", "comm_mse"},
        R"py(for method, g in df.groupby("method"):
    m = g.groupby("mu")[["beampattern_mse", "comm_mse"]].mean()
    ax.plot(m["beampattern_mse"], m["comm_mse"], marker="o", label=method)
ax.set_xlabel("beampattern MSE")
ax.set_ylabel("symbol MSE")
)py"}},
  };
  return table;
}

std::vector<std::string> read_header(const std::string& csv_path, bool& empty) {
  std::ifstream f(csv_path);
  if (!f) throw ConfigError("cannot read CSV " + csv_path);
  std::string line;
  std::vector<std::string> cols;
  empty = true;
  if (!std::getline(f, line)) return cols;
  std::stringstream ss(line);
  std::string c;
  while (std::getline(ss, c, ',')) cols.push_back(c);
  std::string next;
  while (std::getline(f, next))
    if (!next.empty()) {
      empty = false;
      break;
    }
  return cols;
}

}  // namespace

std::string plot_script_text(const std::string& csv_path, const std::string& figure_kind) {
  const auto it = figures().find(figure_kind);
  if (it == figures().end()) throw ConfigError("unknown figure kind '" + figure_kind + "'");
  bool empty = true;
  const auto cols = read_header(csv_path, empty);
  std::ostringstream os;
  os << "#!/usr/bin/env python3\n"
     << "# Plot for " << csv_path << " (" << figure_kind << ").\n";
  if (empty) {
    os << "# WARNING: the CSV has no data rows; this script draws an empty figure.\n"
       << "import matplotlib.pyplot as plt\n"
       << "fig, ax = plt.subplots()\n"
       << "ax.set_title(\"no data\")\n"
       << "fig.savefig(\"" << csv_path << ".png\", dpi=150)\n";
    return os.str();
  }
  for (const auto& need : it->second.columns)
    if (std::find(cols.begin(), cols.end(), need) == cols.end())
      throw ConfigError("CSV " + csv_path + " lacks column '" + need + "' needed for a " +
                        figure_kind + " plot");
  os << "import pandas as pd\n"
     << "import matplotlib.pyplot as plt\n\n"
     << "df = pd.read_csv(\"" << csv_path << "\")\n"
     << "fig, ax = plt.subplots(figsize=(6, 4.5))\n"
     << it->second.body << "ax.grid(True, which=\"both\", alpha=0.3)\n"
     << "ax.legend(fontsize=8)\n"
     << "fig.tight_layout()\n"
     << "fig.savefig(\"" << csv_path << ".png\", dpi=150)\n";
  return os.str();
}

void emit_plot_script(const std::string& csv_path, const std::string& figure_kind,
                      const std::string& script_path) {
  const std::string text = plot_script_text(csv_path, figure_kind);
  std::ofstream f(script_path);
  if (!f) throw ConfigError("cannot write plot script " + script_path);
  f << text;
}

}  // namespace bpmisac
