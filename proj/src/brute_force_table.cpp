// Second transcription of the table of games, kept apart from
// table_of_games.cpp. Every destination (i, l) is evaluated as a piecewise
// function; nothing here shares code with the production dispatcher.

#include <cstdint>
#include <vector>

#include "lanekin/validation.hpp"

namespace lanekin::validation {

namespace {

struct Ctx {
  int n, L, h, p, r;
  double a;
  std::vector<double> R;  // R[l] = L * rho*_l, one-based (R[0] unused)
};

double harm(int lo, int hi, int c) {
  double s = 0.0;
  for (int z = lo; z <= hi; ++z) s += 1.0 / static_cast<double>(z - c);
  return s;
}

double lin(int lo, int hi, int c) {
  double s = 0.0;
  for (int z = lo; z <= hi; ++z) s += static_cast<double>(c - z);
  return s;
}

// Weight 1/(i-c) / sum_{z=lo..hi} 1/(z-c) on lo..hi; when the range is empty
// the branch mass stays at class c.
double acc_w(int i, int lo, int hi, int c) {
  if (lo > hi) return i == c ? 1.0 : 0.0;
  if (i < lo || i > hi) return 0.0;
  return (1.0 / (i - c)) / harm(lo, hi, c);
}

// Weight (c-i) / sum_{z=lo..hi} (c-z) on lo..hi; a zero normalizer puts the
// branch mass on class c.
double brk_w(int i, int lo, int hi, int c) {
  const double s = lin(lo, hi, c);
  if (s <= 0.0) return i == c ? 1.0 : 0.0;
  if (i < lo || i > hi) return 0.0;
  return (c - i) / s;
}

double case1(const Ctx& k, int i, int l) {
  const int n = k.n, h = k.h, p = k.p, r = k.r;
  const double a = k.a;
  (void)n;
  if (r == 1) {
    if (l != 1) return 0.0;
    double v = 0.0;
    if (i == h) v += 1.0 - a * (1.0 - k.R[1]);
    v += a * (1.0 - k.R[1]) * (i > h ? acc_w(i, h + 1, p, h) : 0.0);
    return v;
  }
  if (h == 1) {
    if (l != r) return 0.0;
    if (i == 1) return k.R[r];
    return (1.0 - k.R[r]) * acc_w(i, 2, p, 1);
  }
  const double lc = k.R[r] * (1.0 - k.R[r - 1]);
  if (l == r) {
    if (i < h) return 0.0;
    if (i == h) return (1.0 - a) * (1.0 - lc);
    if (i <= p) return a * (1.0 - lc) * acc_w(i, h + 1, p, h);
    return 0.0;
  }
  if (l == r - 1) {
    if (i < h) return (1.0 - a) * lc * brk_w(i, 1, h - 1, h);
    if (i == h) return a * lc;
    return 0.0;
  }
  return 0.0;
}

double case2(const Ctx& k, int i, int l) {
  const int n = k.n, h = k.h, p = k.p, r = k.r, L = k.L;
  const double a = k.a;
  if (r == L) return (l == L && i == p) ? 1.0 : 0.0;
  if (l == r) return i == p ? k.R[r + 1] : 0.0;
  if (l != r + 1) return 0.0;
  const double fr = 1.0 - k.R[r + 1];
  if (h == n) return fr * brk_w(i, p + 1, n, n);
  double v = (1.0 - a) * fr * brk_w(i, p + 1, h, h);
  v += a * fr * acc_w(i, h + 1, n - 1, h);
  return v;
}

double case3_interior_class(const Ctx& k, int i, int l) {
  const int n = k.n, h = k.h, r = k.r, L = k.L;
  const double a = k.a;
  if (r != 1 && r != L) {
    const double S = k.R[r - 1] + k.R[r + 1];
    if (l == r) {
      if (i < h) return 0.5 * (1 - a) * brk_w(i, 1, h - 1, h) * k.R[r] * S;
      if (i == h) return 0.5 * (1 - a) * (1 - k.R[r]) * S;
      return 0.5 * a * acc_w(i, h + 1, n, h) * S;
    }
    if (l == r - 1) {
      if (i < h) return 0.5 * (1 - a) * brk_w(i, 1, h - 1, h) * k.R[r] * (1 - k.R[r - 1]);
      if (i == h) return 0.5 * a * (1 - k.R[r - 1]);
      return 0.0;
    }
    if (l == r + 1) {
      if (i < h) return 0.0;
      if (i == h) return 0.5 * (1 - a) * (1 - k.R[r + 1]);
      return 0.5 * a * acc_w(i, h + 1, n, h) * (1 - k.R[r + 1]);
    }
    return 0.0;
  }
  if (r == 1) {
    if (l == 1) {
      if (i < h) return (1 - a) * brk_w(i, 1, h - 1, h) * k.R[1] * k.R[2];
      if (i == h) return (1 - a) * (1 - k.R[1]) * k.R[2];
      return a * acc_w(i, h + 1, n, h) * k.R[2];
    }
    if (l == 2) {
      if (i < h) return 0.0;
      if (i == h) return (1 - a) * (1 - k.R[2]);
      return a * acc_w(i, h + 1, n, h) * (1 - k.R[2]);
    }
    return 0.0;
  }
  // r == L
  if (l == L) {
    if (i < h) return (1 - a) * brk_w(i, 1, h - 1, h) * k.R[L - 1] * k.R[L];
    if (i == h) return (1 - a) * (1 - k.R[L]) * k.R[L - 1];
    return a * acc_w(i, h + 1, n, h) * k.R[L - 1];
  }
  if (l == L - 1) {
    if (i < h) return (1 - a) * brk_w(i, 1, h - 1, h) * (1 - k.R[L - 1]);
    if (i == h) return a * (1 - k.R[L - 1]);
    return 0.0;
  }
  return 0.0;
}

double case3_first_class(const Ctx& k, int i, int l) {
  const int n = k.n, r = k.r, L = k.L;
  const double a = k.a;
  if (r != 1 && r != L) {
    const double S = k.R[r - 1] + k.R[r + 1];
    if (l == r) return i == 1 ? 1 - a * k.R[r] * (1 - 0.5 * S) : 0.0;
    if (l == r - 1) return i == 1 ? 0.0 : 0.5 * a * acc_w(i, 2, n, 1) * k.R[r] * (1 - k.R[r - 1]);
    if (l == r + 1) return i == 1 ? 0.0 : 0.5 * a * acc_w(i, 2, n, 1) * k.R[r] * (1 - k.R[r + 1]);
    return 0.0;
  }
  if (r == 1) {
    if (l == 1) return i == 1 ? 1 - a * k.R[1] * (1 - k.R[2]) : 0.0;
    if (l == 2) return i == 1 ? 0.0 : a * acc_w(i, 2, n, 1) * k.R[1] * (1 - k.R[2]);
    return 0.0;
  }
  if (l == L) return i == 1 ? 1 - a * k.R[L] * (1 - k.R[L - 1]) : 0.0;
  if (l == L - 1) return i == 1 ? 0.0 : a * acc_w(i, 2, n, 1) * k.R[L] * (1 - k.R[L - 1]);
  return 0.0;
}

double case3_last_class(const Ctx& k, int i, int l) {
  const int n = k.n, r = k.r, L = k.L;
  const double a = k.a;
  if (r != 1 && r != L) {
    const double S = k.R[r - 1] + k.R[r + 1];
    if (l == r) return i < n ? 0.5 * brk_w(i, 1, n - 1, n) * S * k.R[r] : 0.5 * S * (1 - k.R[r]);
    if (l == r - 1) {
      return i < n ? 0.5 * (1 - a) * brk_w(i, 1, n - 1, n) * (1 - k.R[r - 1])
                   : 0.5 * a * (1 - k.R[r - 1]);
    }
    if (l == r + 1) return i < n ? 0.0 : 0.5 * (1 - k.R[r + 1]);
    return 0.0;
  }
  if (r == 1) {
    if (l == 1) return i < n ? brk_w(i, 1, n - 1, n) * k.R[1] * k.R[2] : (1 - k.R[1]) * k.R[2];
    if (l == 2) return i < n ? 0.0 : 1 - k.R[2];
    return 0.0;
  }
  if (l == L) return i < n ? brk_w(i, 1, n - 1, n) * k.R[L - 1] * k.R[L] : (1 - k.R[L]) * k.R[L - 1];
  if (l == L - 1) {
    return i < n ? (1 - a) * brk_w(i, 1, n - 1, n) * (1 - k.R[L - 1]) : a * (1 - k.R[L - 1]);
  }
  return 0.0;
}

double entry(const Ctx& k, int i, int l) {
  if (k.h < k.p) return case1(k, i, l);
  if (k.h > k.p) return case2(k, i, l);
  if (k.h == 1) return case3_first_class(k, i, l);
  if (k.h == k.n) return case3_last_class(k, i, l);
  return case3_interior_class(k, i, l);
}

Ctx make_ctx(const InteractionContext& ctx) {
  Ctx k;
  k.n = ctx.classes;
  k.L = ctx.lanes();
  k.h = ctx.candidate + 1;
  k.p = ctx.field + 1;
  k.r = ctx.lane + 1;
  k.a = ctx.alpha;
  k.R.assign(static_cast<std::size_t>(k.L) + 1, 0.0);
  for (int l = 1; l <= k.L; ++l) k.R[static_cast<std::size_t>(l)] = k.L * ctx.rho_star[static_cast<std::size_t>(l - 1)];
  return k;
}

}  // namespace

std::vector<double> brute_force_row(const InteractionContext& ctx) {
  const Ctx k = make_ctx(ctx);
  std::vector<double> dense(static_cast<std::size_t>(k.L) * static_cast<std::size_t>(k.n), 0.0);
  for (int l = 1; l <= k.L; ++l) {
    for (int i = 1; i <= k.n; ++i) {
      dense[static_cast<std::size_t>((l - 1) * k.n + (i - 1))] = entry(k, i, l);
    }
  }
  return dense;
}

double brute_force_row_sum(const InteractionContext& ctx) {
  double s = 0.0;
  for (double v : brute_force_row(ctx)) s += v;
  return s;
}

}  // namespace lanekin::validation
