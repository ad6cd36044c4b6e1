#include <algorithm>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "chj/cli.hpp"

namespace chj::cli {

namespace {

bool listed(const RunManifest& m, const std::string& name) {
  return std::find(m.files.begin(), m.files.end(), name) != m.files.end();
}

/// Data-line ranges [first, last] of each distinct leading `t` value in a
/// long-format `t,x,value` file.
std::vector<std::pair<long, long>> time_blocks(const std::string& path) {
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  std::vector<std::pair<long, long>> blocks;
  std::string current;
  long row = 0;
  while (std::getline(f, line)) {
    const std::string t = line.substr(0, line.find(','));
    if (blocks.empty() || t != current) {
      blocks.emplace_back(row, row);
      current = t;
    }
    blocks.back().second = row;
    ++row;
  }
  return blocks;
}

}  // namespace

std::string emit_plot_script(const RunManifest& manifest, const std::string& out_dir) {
  const bool any_csv = std::any_of(manifest.files.begin(), manifest.files.end(), [](const std::string& f) {
    return f.size() > 4 && f.compare(f.size() - 4, 4, ".csv") == 0;
  });
  if (!any_csv) return {};

  const std::string path = out_dir + "/plot.gp";
  std::ofstream s(path, std::ios::binary | std::ios::trunc);
  s << "# gnuplot script; run from this directory with: gnuplot plot.gp\n"
    << "set datafile separator ','\n"
    << "set terminal pngcairo size 900,600\n"
    << "set grid\n";

  if (listed(manifest, "periodic.csv")) {
    const auto blocks = time_blocks(out_dir + "/periodic.csv");
    s << "set output 'periodic.png'\nset xlabel 'x'\nset ylabel 'w(x,t)'\nplot \\\n";
    const std::size_t count = std::min<std::size_t>(8, blocks.size());
    for (std::size_t j = 0; j < count; ++j) {
      const auto [a, b] = blocks[j * blocks.size() / count];
      s << "  'periodic.csv' skip 1 every ::" << a << "::" << b << " using 2:3 with lines title 'slice "
        << j * blocks.size() / count << "'" << (j + 1 < count ? ", \\\n" : "\n");
    }
  }
  if (listed(manifest, "bifurcation.csv")) {
    s << "set output 'bifurcation.png'\nset xlabel 'lambda'\nset ylabel 'amplitude'\n"
      << "plot 'bifurcation.csv' skip 1 using 1:3 with linespoints title 'amplitude'\n";
  }
  if (listed(manifest, "supnorm.csv")) {
    s << "set output 'supnorm.png'\nset xlabel 't'\nset ylabel 'sup norm'\n"
      << "plot 'supnorm.csv' skip 1 using 1:2 with lines title 'sup |T_t phi|'\n";
  }
  if (listed(manifest, "orbit.csv")) {
    s << "set output 'orbit.png'\nset xlabel 'x'\nset ylabel 'u0(x)'\n"
      << "plot 'orbit.csv' skip 1 using 1:4 with lines title 'u0', '' skip 1 using 1:3 with lines title 'p0'\n";
  }
  for (const std::string f : {"field.csv", "u_plus.csv", "u_minus.csv", "action_field.csv"}) {
    if (!listed(manifest, f)) continue;
    s << "set output '" << f.substr(0, f.size() - 4) << ".png'\nset xlabel 'x'\nset ylabel 'value'\n"
      << "plot '" << f << "' skip 1 using 1:2 with lines title '" << f << "'\n";
  }
  return path;
}

}  // namespace chj::cli
