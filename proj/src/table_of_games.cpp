#include "lanekin/table_of_games.hpp"

#include <algorithm>
#include <sstream>

namespace lanekin {

std::string_view case_label(GameCase c) noexcept {
  switch (c) {
    case GameCase::kIa: return "I(a)";
    case GameCase::kIb: return "I(b)";
    case GameCase::kIc: return "I(c)";
    case GameCase::kIIa: return "II(a)";
    case GameCase::kIIb: return "II(b)";
    case GameCase::kIIc: return "II(c)";
    case GameCase::kIIIa: return "III(a)";
    case GameCase::kIIIb: return "III(b)";
    case GameCase::kIIIc: return "III(c)";
    case GameCase::kIIId: return "III(d)";
    case GameCase::kIIIe: return "III(e)";
    case GameCase::kIIIf: return "III(f)";
    case GameCase::kIIIg: return "III(g)";
    case GameCase::kIIIh: return "III(h)";
    case GameCase::kIIIi: return "III(i)";
  }
  return "?";
}

GameCase classify(int h, int p, int r, int classes, int lanes) {
  if (h < 0 || h >= classes || p < 0 || p >= classes) {
    throw LaneIndexError("velocity class out of range");
  }
  if (r < 0 || r >= lanes) throw LaneIndexError("lane out of range");
  const bool slowest = r == 0;
  const bool fastest = r == lanes - 1;
  if (h < p) {
    if (slowest) return GameCase::kIc;
    return h == 0 ? GameCase::kIb : GameCase::kIa;
  }
  if (h > p) {
    if (fastest) return GameCase::kIIc;
    return h == classes - 1 ? GameCase::kIIb : GameCase::kIIa;
  }
  if (h == 0) {
    if (slowest) return GameCase::kIIIe;
    if (fastest) return GameCase::kIIIf;
    return GameCase::kIIId;
  }
  if (h == classes - 1) {
    if (slowest) return GameCase::kIIIh;
    if (fastest) return GameCase::kIIIi;
    return GameCase::kIIIg;
  }
  if (slowest) return GameCase::kIIIb;
  if (fastest) return GameCase::kIIIc;
  return GameCase::kIIIa;
}

double TransitionRow::probability(int cls, int lane) const noexcept {
  for (const auto& e : entries) {
    if (e.cls == cls && e.lane == lane) return e.prob;
  }
  return 0.0;
}

double TransitionRow::sum() const noexcept {
  double s = 0.0;
  for (const auto& e : entries) s += e.prob;
  return s;
}

namespace {

// The case formulas are written with one-based class and lane numbers
// (h, p, i in 1..n; r, l in 1..L); `emit` converts back to zero-based.
class RowBuilder {
 public:
  RowBuilder(const InteractionContext& ctx, TransitionRow& row)
      : ctx_(ctx), row_(row), n_(ctx.classes), lanes_(ctx.lanes()) {
    row_.entries.clear();
  }

  /// L * rho*_l for one-based lane l.
  double load(int l) const {
    return lanes_ * ctx_.rho_star[static_cast<std::size_t>(l - 1)];
  }

  void emit(int i, int l, double value, std::string_view case_name, std::string_view role) {
    if (value < 0.0) {
      if (value < -kNegativeTolerance) {
        std::ostringstream os;
        os << "negative table entry " << value << " in " << case_name << ":" << role
           << " (h=" << ctx_.candidate + 1 << ", p=" << ctx_.field + 1 << ", r=" << ctx_.lane + 1
           << ", i=" << i << ", l=" << l << ")";
        throw ModelViolationError(os.str(), std::string(case_name) + ":" + std::string(role));
      }
      value = 0.0;
    }
    for (auto& e : row_.entries) {
      if (e.cls == i - 1 && e.lane == l - 1) {
        e.prob += value;
        return;
      }
    }
    row_.entries.push_back({i - 1, l - 1, value});
  }

  // Acceleration branch: mass spread over classes lo..hi with weights
  // proportional to 1/(i - h). An empty range keeps the mass at class h.
  void accelerate(int l, int h, int lo, int hi, double mass, std::string_view c,
                  std::string_view role) {
    double norm = 0.0;
    for (int z = lo; z <= hi; ++z) norm += 1.0 / (z - h);
    if (lo > hi) {
      emit(h, l, mass, c, role);
      return;
    }
    for (int i = lo; i <= hi; ++i) emit(i, l, mass / ((i - h) * norm), c, role);
  }

  // Braking branch: mass spread over classes lo..hi with weights
  // proportional to (top - i). A vanishing normalizer keeps the mass at
  // class `top`.
  void brake(int l, int top, int lo, int hi, double mass, std::string_view c,
             std::string_view role) {
    double norm = 0.0;
    for (int z = lo; z <= hi; ++z) norm += top - z;
    if (norm <= 0.0) {
      emit(top, l, mass, c, role);
      return;
    }
    for (int i = lo; i <= hi; ++i) emit(i, l, mass * (top - i) / norm, c, role);
  }

  int n() const { return n_; }
  int lanes() const { return lanes_; }

 private:
  const InteractionContext& ctx_;
  TransitionRow& row_;
  int n_;
  int lanes_;
};

constexpr std::string_view kSame = "same";
constexpr std::string_view kSlower = "slower";
constexpr std::string_view kFaster = "faster";

// Candidate slower than the field vehicle: keep lane or move to r-1.
void case_I(RowBuilder& b, GameCase gc, int h, int p, int r, double a) {
  const std::string_view c = case_label(gc);
  if (gc == GameCase::kIc) {
    const double free1 = 1.0 - b.load(1);
    b.emit(h, 1, 1.0 - a * free1, c, kSame);
    b.accelerate(1, h, h + 1, p, a * free1, c, kSame);
    return;
  }
  if (gc == GameCase::kIb) {
    const double here = b.load(r);
    b.emit(1, r, here, c, kSame);
    b.accelerate(r, 1, 2, p, 1.0 - here, c, kSame);
    return;
  }
  const double change = b.load(r) * (1.0 - b.load(r - 1));
  const double stay = 1.0 - change;
  b.emit(h, r, (1.0 - a) * stay, c, kSame);
  b.accelerate(r, h, h + 1, p, a * stay, c, kSame);
  b.brake(r - 1, h, 1, h - 1, (1.0 - a) * change, c, kSlower);
  b.emit(h, r - 1, a * change, c, kSlower);
}

// Candidate faster than the field vehicle: follow it or move to r+1.
void case_II(RowBuilder& b, GameCase gc, int h, int p, int r, double a) {
  const std::string_view c = case_label(gc);
  const int n = b.n();
  if (gc == GameCase::kIIc) {
    b.emit(p, r, 1.0, c, kSame);
    return;
  }
  const double next = b.load(r + 1);
  b.emit(p, r, next, c, kSame);
  if (gc == GameCase::kIIb) {
    b.brake(r + 1, n, p + 1, n, 1.0 - next, c, kFaster);
    return;
  }
  b.brake(r + 1, h, p + 1, h, (1.0 - a) * (1.0 - next), c, kFaster);
  b.accelerate(r + 1, h, h + 1, n - 1, a * (1.0 - next), c, kFaster);
}

// Equal speeds: any admissible lane.
void case_III(RowBuilder& b, GameCase gc, int h, int r, double a) {
  const std::string_view c = case_label(gc);
  const int n = b.n();
  const int L = b.lanes();
  switch (gc) {
    case GameCase::kIIIa: {
      const double side = b.load(r - 1) + b.load(r + 1);
      const double here = b.load(r);
      b.brake(r, h, 1, h - 1, 0.5 * (1.0 - a) * here * side, c, kSame);
      b.emit(h, r, 0.5 * (1.0 - a) * (1.0 - here) * side, c, kSame);
      b.accelerate(r, h, h + 1, n, 0.5 * a * side, c, kSame);
      const double free_slow = 1.0 - b.load(r - 1);
      b.brake(r - 1, h, 1, h - 1, 0.5 * (1.0 - a) * here * free_slow, c, kSlower);
      b.emit(h, r - 1, 0.5 * a * free_slow, c, kSlower);
      const double free_fast = 1.0 - b.load(r + 1);
      b.emit(h, r + 1, 0.5 * (1.0 - a) * free_fast, c, kFaster);
      b.accelerate(r + 1, h, h + 1, n, 0.5 * a * free_fast, c, kFaster);
      return;
    }
    case GameCase::kIIIb: {
      const double here = b.load(1);
      const double up = b.load(2);
      b.brake(1, h, 1, h - 1, (1.0 - a) * here * up, c, kSame);
      b.emit(h, 1, (1.0 - a) * (1.0 - here) * up, c, kSame);
      b.accelerate(1, h, h + 1, n, a * up, c, kSame);
      b.emit(h, 2, (1.0 - a) * (1.0 - up), c, kFaster);
      b.accelerate(2, h, h + 1, n, a * (1.0 - up), c, kFaster);
      return;
    }
    case GameCase::kIIIc: {
      const double here = b.load(L);
      const double down = b.load(L - 1);
      b.brake(L, h, 1, h - 1, (1.0 - a) * down * here, c, kSame);
      b.emit(h, L, (1.0 - a) * (1.0 - here) * down, c, kSame);
      b.accelerate(L, h, h + 1, n, a * down, c, kSame);
      b.brake(L - 1, h, 1, h - 1, (1.0 - a) * (1.0 - down), c, kSlower);
      b.emit(h, L - 1, a * (1.0 - down), c, kSlower);
      return;
    }
    case GameCase::kIIId: {
      const double here = b.load(r);
      const double side = b.load(r - 1) + b.load(r + 1);
      b.emit(1, r, 1.0 - a * here * (1.0 - 0.5 * side), c, kSame);
      b.accelerate(r - 1, 1, 2, n, 0.5 * a * here * (1.0 - b.load(r - 1)), c, kSlower);
      b.accelerate(r + 1, 1, 2, n, 0.5 * a * here * (1.0 - b.load(r + 1)), c, kFaster);
      return;
    }
    case GameCase::kIIIe: {
      const double move = a * b.load(1) * (1.0 - b.load(2));
      b.emit(1, 1, 1.0 - move, c, kSame);
      b.accelerate(2, 1, 2, n, move, c, kFaster);
      return;
    }
    case GameCase::kIIIf: {
      const double move = a * b.load(L) * (1.0 - b.load(L - 1));
      b.emit(1, L, 1.0 - move, c, kSame);
      b.accelerate(L - 1, 1, 2, n, move, c, kSlower);
      return;
    }
    case GameCase::kIIIg: {
      const double side = b.load(r - 1) + b.load(r + 1);
      const double here = b.load(r);
      b.brake(r, n, 1, n - 1, 0.5 * side * here, c, kSame);
      b.emit(n, r, 0.5 * side * (1.0 - here), c, kSame);
      const double free_slow = 1.0 - b.load(r - 1);
      b.brake(r - 1, n, 1, n - 1, 0.5 * (1.0 - a) * free_slow, c, kSlower);
      b.emit(n, r - 1, 0.5 * a * free_slow, c, kSlower);
      b.emit(n, r + 1, 0.5 * (1.0 - b.load(r + 1)), c, kFaster);
      return;
    }
    case GameCase::kIIIh: {
      const double here = b.load(1);
      const double up = b.load(2);
      b.brake(1, n, 1, n - 1, here * up, c, kSame);
      b.emit(n, 1, (1.0 - here) * up, c, kSame);
      b.emit(n, 2, 1.0 - up, c, kFaster);
      return;
    }
    case GameCase::kIIIi: {
      const double here = b.load(L);
      const double down = b.load(L - 1);
      b.brake(L, n, 1, n - 1, down * here, c, kSame);
      b.emit(n, L, (1.0 - here) * down, c, kSame);
      b.brake(L - 1, n, 1, n - 1, (1.0 - a) * (1.0 - down), c, kSlower);
      b.emit(n, L - 1, a * (1.0 - down), c, kSlower);
      return;
    }
    default:
      return;
  }
}

std::string describe(const InteractionContext& ctx) {
  std::ostringstream os;
  os << "h=" << ctx.candidate + 1 << " p=" << ctx.field + 1 << " r=" << ctx.lane + 1
     << " alpha=" << ctx.alpha << " rho*=[";
  for (std::size_t l = 0; l < ctx.rho_star.size(); ++l) {
    os << (l ? "," : "") << ctx.rho_star[l];
  }
  os << "]";
  return os.str();
}

}  // namespace

void transition_row(const InteractionContext& ctx, TablePolicy policy, TransitionRow& out) {
  const GameCase gc = classify(ctx.candidate, ctx.field, ctx.lane, ctx.classes, ctx.lanes());
  out.game_case = gc;
  out.renormalized = false;

  RowBuilder b(ctx, out);
  const int h = ctx.candidate + 1;
  const int p = ctx.field + 1;
  const int r = ctx.lane + 1;
  if (h < p) {
    case_I(b, gc, h, p, r, ctx.alpha);
  } else if (h > p) {
    case_II(b, gc, h, p, r, ctx.alpha);
  } else {
    case_III(b, gc, h, r, ctx.alpha);
  }

  double sum = 0.0;
  double lo = out.entries.empty() ? 0.0 : out.entries.front().prob;
  for (const auto& e : out.entries) {
    sum += e.prob;
    lo = std::min(lo, e.prob);
  }
  out.raw_sum = sum;
  out.min_entry = lo;

  if (policy == TablePolicy::kRenormalize) {
    if (!(sum > 0.0)) {
      throw DegenerateRowError("table row has zero raw sum: " + describe(ctx));
    }
    for (auto& e : out.entries) e.prob /= sum;
    out.renormalized = true;
  }
}

TransitionRow transition_row(const InteractionContext& ctx, TablePolicy policy) {
  TransitionRow row;
  transition_row(ctx, policy, row);
  return row;
}

LaneTable::LaneTable(int lane, double alpha, std::span<const double> rho_star, int classes,
                     TablePolicy policy)
    : classes_(classes), lanes_(static_cast<int>(rho_star.size())) {
  const std::size_t block = static_cast<std::size_t>(lanes_) * static_cast<std::size_t>(classes_);
  values_.assign(static_cast<std::size_t>(classes_) * static_cast<std::size_t>(classes_) * block,
                 0.0);
  InteractionContext ctx{0, 0, lane, alpha, rho_star, classes};
  TransitionRow row;
  row.entries.reserve(3 * static_cast<std::size_t>(classes));
  for (int h = 0; h < classes_; ++h) {
    for (int p = 0; p < classes_; ++p) {
      ctx.candidate = h;
      ctx.field = p;
      transition_row(ctx, policy, row);
      const std::size_t base =
          (static_cast<std::size_t>(h) * classes_ + static_cast<std::size_t>(p)) * block;
      for (const auto& e : row.entries) {
        values_[base + static_cast<std::size_t>(e.lane) * classes_ + static_cast<std::size_t>(e.cls)] =
            e.prob;
      }
    }
  }
}

}  // namespace lanekin
