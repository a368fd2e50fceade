// Hot paths: per-sample planner work, bus fan-out, wire text, and the
// episode export writer.

#include <random>

#include <benchmark/benchmark.h>

#include "teleop/bus.hpp"
#include "teleop/planner.hpp"
#include "teleop/recorder/parquet.hpp"
#include "teleop/robot/wire.hpp"

namespace {

using namespace teleop;

void BM_RpyRoundTrip(benchmark::State& st) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> a(-kPi, kPi), p(-1.5, 1.5);
  std::vector<Rpy> in(1024);
  for (auto& r : in) r = {a(rng), p(rng), a(rng)};
  std::size_t i = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(quat_to_rpy(rpy_to_quat(in[i++ & 1023])));
  }
}
BENCHMARK(BM_RpyRoundTrip);

void BM_WrapAngle(benchmark::State& st) {
  double x = -1e3;
  for (auto _ : st) {
    benchmark::DoNotOptimize(wrap_angle(x));
    x += 0.37;
  }
}
BENCHMARK(BM_WrapAngle);

void BM_PlannerProcessPose(benchmark::State& st) {
  Planner planner{PlannerConfig{}};
  RobotState fb;
  fb.ee_position = {0.4, 0, 0.25};
  fb.ee_orientation = rpy_to_quat({kPi, 0, 0});
  planner.on_feedback(fb);
  PoseSample s;
  planner.process_pose(s, Nanos{1});
  planner.handle_button({Button::volume_up, 0}, Nanos{2});
  int64_t t = 3;
  double x = 0;
  for (auto _ : st) {
    x = x > 0.05 ? 0 : x + 1e-4;
    s.position = {x, 0, -x};
    benchmark::DoNotOptimize(planner.process_pose(s, Nanos{t++}));
  }
}
BENCHMARK(BM_PlannerProcessPose);

void BM_BusPublish(benchmark::State& st) {
  VirtualClock clock;
  Bus bus(clock);
  const TopicName topic("/left", "phone2act/target_pose");
  std::vector<Subscription> subs;
  for (int64_t i = 0; i < st.range(0); ++i) subs.push_back(bus.subscribe(topic, QosProfile::keep_last(1)));
  const TargetPose t;
  for (auto _ : st) benchmark::DoNotOptimize(bus.publish(topic, t));
  st.SetItemsProcessed(st.iterations());
}
BENCHMARK(BM_BusPublish)->Arg(0)->Arg(1)->Arg(4)->Arg(16);

void BM_WireFormatParse(benchmark::State& st) {
  const robot::WireCommand c{412.5, -33.25, 250.125, 179.5, -0.25, 45.75, 123456};
  for (auto _ : st) benchmark::DoNotOptimize(robot::parse_line(robot::format_line(c)));
}
BENCHMARK(BM_WireFormatParse);

void BM_ParquetWrite(benchmark::State& st) {
  const auto rows = static_cast<std::size_t>(st.range(0));
  parquet::Table t;
  parquet::Column ts{"timestamp", parquet::ColumnKind::float64, {}, {}, {}};
  parquet::Column ix{"index", parquet::ColumnKind::uint64, {}, {}, {}};
  parquet::Column state{"observation.state", parquet::ColumnKind::float32_list, {}, {}, {}};
  for (std::size_t i = 0; i < rows; ++i) {
    ts.f64.push_back(0.05 * static_cast<double>(i));
    ix.ints.push_back(i);
    state.lists.emplace_back(13, static_cast<float>(i));
  }
  t.columns = {ts, ix, state};
  std::size_t bytes = 0;
  for (auto _ : st) {
    const auto b = parquet::write(t);
    bytes = b.size();
    benchmark::DoNotOptimize(b.data());
  }
  st.SetBytesProcessed(static_cast<int64_t>(st.iterations() * bytes));
}
BENCHMARK(BM_ParquetWrite)->Arg(200)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
