#include "snls/evolution.hpp"
#include "snls/groundstate.hpp"
#include "snls/io.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace snls;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(::testing::TempDir()) / ("snls_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

TrajectoryRecord short_run() {
  const auto g = GridSpec::radial(20.0, 256);
  ComplexField v = ts::gaussian(g, 0.5);
  v *= complex(0.0, 1.0);
  EvolutionConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 0.2;
  cfg.output_stride = 2;
  cfg.monitors = {"virial", "l5"};
  cfg.virial_R = 5.0;
  return evolve(StatePair(ts::gaussian(g), v, 3.0, 9.0), cfg);
}

} // namespace

TEST(Crf1, RoundTripAllModes) {
  std::mt19937_64 rng(41);
  for (const auto& g : {GridSpec::radial(12.0, 64), GridSpec::cartesian(4.0, 8), GridSpec::cylindrical(5.0, 12, 3.0, 8)}) {
    const auto f = g.mode() == GridMode::Cart3D ? ts::random_cart_field(g, rng) : ts::random_radial_field(g, rng);
    std::stringstream ss;
    write_crf1(ss, f);
    EXPECT_EQ(ss.str().size(), 64 + 16 * g.size());
    EXPECT_EQ(ss.str().substr(0, 4), "CRF1");
    const auto h = read_crf1(ss);
    EXPECT_TRUE(h.grid() == g);
    for (std::size_t i = 0; i < f.size(); ++i) ASSERT_EQ(h[i], f[i]);
  }
}

TEST(Crf1, RejectsBadInput) {
  std::stringstream bad("CRF2 and more bytes than a header needs, padded out to sixty-four bytes....");
  EXPECT_THROW(read_crf1(bad), FormatError);
  std::stringstream ss;
  write_crf1(ss, ts::gaussian(GridSpec::radial(5.0, 16)));
  std::string s = ss.str();
  std::stringstream truncated(s.substr(0, s.size() - 8));
  EXPECT_THROW(read_crf1(truncated), FormatError);
  s[4] = 7;
  std::stringstream mode(s);
  EXPECT_THROW(read_crf1(mode), FormatError);
}

TEST(Crf1, StateSnapshotRoundTrip) {
  const auto dir = scratch_dir("state");
  const auto g = GridSpec::radial(10.0, 128);
  const StatePair s(ts::gaussian(g), ts::gaussian(g, 0.3, 2.0), 3.0, 9.0);
  write_state(dir / "s.crf", s);
  const auto t = read_state(dir / "s.crf", 3.0, 9.0);
  EXPECT_EQ(max_abs_difference(t.u, s.u), 0.0);
  EXPECT_EQ(max_abs_difference(t.v, s.v), 0.0);
  EXPECT_THROW(read_state(dir / "missing.crf", 3.0, 9.0), FormatError);
}

TEST(Reports, RowsRoundTrip) {
  const auto rec = short_run();
  std::stringstream ss;
  write_reports_rows(ss, rec);
  const auto back = read_reports_rows(ss);
  ASSERT_EQ(back.reports.size(), rec.reports.size());
  for (std::size_t i = 0; i < rec.reports.size(); ++i) EXPECT_EQ(report_values(back.reports[i]), report_values(rec.reports[i]));
  for (const auto& [name, series] : rec.monitor_series) EXPECT_EQ(back.series(name), series) << name;
}

TEST(Reports, RowsRejectMissingFields) {
  std::stringstream ss("{\"time\": 0.0}\n");
  EXPECT_THROW(read_reports_rows(ss), FormatError);
  std::stringstream junk("not json\n");
  EXPECT_THROW(read_reports_rows(junk), FormatError);
}

TEST(Reports, CsvHeaderAndRows) {
  const auto rec = short_run();
  std::stringstream ss;
  write_reports_csv(ss, rec);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header.rfind("time,", 0), 0u);
  std::size_t rows = 0;
  for (std::string line; std::getline(ss, line);) ++rows;
  EXPECT_EQ(rows, rec.reports.size());
}

TEST(PlotData, EnergySelectionRowCount) {
  const auto rec = short_run();
  const auto dir = scratch_dir("energy");
  const auto paths = emit_plot_data(rec, {"energy"}, dir);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths.front().filename(), "energy.dat");
  EXPECT_EQ(parse_plot_data(paths.front()).size(), rec.reports.size());
}

TEST(PlotData, RoundTripSeventeenDigits) {
  const auto rec = short_run();
  const auto dir = scratch_dir("all");
  const auto paths = emit_plot_data(rec, {"all"}, dir);
  EXPECT_EQ(paths.size(), plot_series_names(rec).size());
  const auto t = rec.times();
  for (const auto& p : paths) {
    const auto rows = parse_plot_data(p);
    const auto want = plot_series(rec, p.stem().string());
    ASSERT_EQ(rows.size(), want.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_EQ(rows[i].first, t[i]);
      EXPECT_EQ(rows[i].second, want[i]) << p;
    }
  }
}

TEST(PlotData, EmptyTrajectoryGivesHeaders) {
  const auto dir = scratch_dir("empty");
  const auto paths = emit_plot_data(TrajectoryRecord{}, {"all"}, dir);
  EXPECT_FALSE(paths.empty());
  for (const auto& p : paths) {
    std::ifstream is(p);
    std::string first, rest;
    std::getline(is, first);
    EXPECT_EQ(first, "# t " + p.stem().string());
    EXPECT_FALSE(static_cast<bool>(std::getline(is, rest)));
  }
}

TEST(PlotData, UnknownSeriesRejected) {
  const auto dir = scratch_dir("unknown");
  EXPECT_THROW(emit_plot_data(short_run(), {"energy", "entropy"}, dir), ConfigurationError);
  EXPECT_FALSE(std::filesystem::exists(dir / "energy.dat"));
}

TEST(Constants, JsonRoundTrip) {
  const auto gs = solve_ground_state(3.0, GridSpec::radial(30.0, 1024));
  const auto c = constants_from_json(nlohmann::json::parse(constants_json(gs).dump()));
  EXPECT_EQ(c.gamma, 3.0);
  EXPECT_EQ(c.K_gs, gs.constants.K_gs);
  EXPECT_EQ(c.M_gs, gs.constants.M_gs);
  EXPECT_EQ(c.C_opt, gs.constants.C_opt);
  EXPECT_THROW(constants_from_json(nlohmann::json::parse("{\"gamma\": 3}")), FormatError);
}
