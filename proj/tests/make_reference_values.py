# Copyright 2026 The hacore authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
# Independent reference computations for the constants frozen into the C++
# tests.  Everything here is derived from first principles (closed forms or
# brute-force enumeration), not from the library under test.  Run:
#
#   python3 tests/make_reference_values.py

import math

FS = 24000.0
M = 6
BASE = 250.0
MIN_FREQ = 20.0
FT = BASE / 2.0
N = int(FS / FT)
HALF = N // 2


def band_edges(m):
    hi = 1.5 * BASE * (2.0**m)
    lo = MIN_FREQ if m == 0 else 1.5 * BASE * (2.0 ** (m - 1))
    return lo, hi


def band_bins(m):
    # Brute force straight from the frequency inequalities, no integer
    # shortcuts: band 0 takes lo <= k*ft <= hi, others lo < k*ft <= hi.
    lo, hi = band_edges(m)
    bins = []
    for k in range(1, HALF + 1):
        f = k * FT
        ok = (lo <= f <= hi) if m == 0 else (lo < f <= hi)
        if ok:
            bins.append(k)
    assert bins == list(range(bins[0], bins[-1] + 1))
    return bins[0], bins[-1]


def tap(m, n):
    # Inverse DFT of the brick-wall mask, then a circular shift by N/2.
    klo, khi = band_bins(m)
    i = (n + HALF) % N
    acc = 0.0
    for k in range(klo, khi + 1):
        c = math.cos(2.0 * math.pi * k * i / N)
        acc += c if k == HALF else 2.0 * c
    return acc / N


def main():
    print("N =", N, " ft =", FT, " half =", HALF)
    print("centers:", [BASE * 2.0**m for m in range(M)])
    print("edges:", [band_edges(m) for m in range(M)])
    print("bins:", [band_bins(m) for m in range(M)])

    # Center taps: at n = N/2 the shifted index is 0 and every cosine is 1,
    # so the tap is (bin count, Nyquist counted once) / N.
    for m in range(M):
        print(f"tap[{m}][96]  = {tap(m, 96)!r}")
    # A couple of off-center probes per band for the frozen spot checks.
    for m, n in [(0, 0), (2, 50), (2, 142), (5, 95), (5, 97)]:
        print(f"tap[{m}][{n:3d}] = {tap(m, n)!r}")

    # Sum rule: all-band tap sum is a unit pulse at N/2 minus the DC leak.
    s96 = sum(tap(m, 96) for m in range(M))
    s50 = sum(tap(m, 50) for m in range(M))
    print("sum taps @96 =", repr(s96), " expect", repr(1.0 - 1.0 / N))
    print("sum taps @50 =", repr(s50), " expect", repr(-1.0 / N))

    # Level meter: full-scale sine over whole cycles has rms 1/sqrt(2).
    print("slm full-scale sine =", repr(20.0 * math.log10(1.0 / math.sqrt(2.0)) + 100.0))
    # Amplitude 0.25 sine, same calibration.
    print("slm 0.25 sine       =", repr(20.0 * math.log10(0.25 / math.sqrt(2.0)) + 100.0))

    # Compressor rule closed forms.
    def gain(ig, knee, cr, level):
        return ig if level <= knee else ig - (1.0 - 1.0 / cr) * (level - knee)

    print("gain(20,50,2,70) =", repr(gain(20, 50, 2, 70)))
    print("gain(20,50,2,40) =", repr(gain(20, 50, 2, 40)))
    print("gain(20,50,1,90) =", repr(gain(20, 50, 1, 90)))
    # Default rule at 65 dB in every band.
    for m in range(M):
        ig = min(10.0 + 3.0 * m, 25.0)
        knee = min(45.0 + 2.0 * m, 60.0)
        cr = min(1.5 + 0.25 * m, 3.0)
        print(f"default gain band {m} @65 = {gain(ig, knee, cr, 65.0)!r}")

    # One-pole tracker step response: alpha = exp(-1/(fs*tau)), attack 5 ms
    # at 24 kHz gives tau = 120 samples; after n steps from zero the level
    # is 1 - alpha^n.
    alpha = math.exp(-1.0 / 120.0)
    print("tracker after 120 =", repr(1.0 - alpha**120))
    print("tracker after 240 =", repr(1.0 - alpha**240))

    # Periodic raised-cosine window samples.
    print("window N=4 :", [0.5 * (1.0 - math.cos(2.0 * math.pi * i / 4)) for i in range(4)])
    w33 = 0.5 * (1.0 - math.cos(2.0 * math.pi * 33 / 192))
    print("window N=192 w[33] =", repr(w33))


if __name__ == "__main__":
    main()
