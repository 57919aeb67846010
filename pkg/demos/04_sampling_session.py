"""
A complete teleoperated sampling session
========================================

Sessions move through a fixed procedure: mount the swab, lock home,
insert, pick the constraint size, sample under the fixture, lock, withdraw
and collect.  Here a seeded script drives a full session through the 25 Hz
runtime, then the simulated oral phantom judges the collected sample.
"""

from opswab import default_config, run_replay, sampling_script

config = default_config()
script = sampling_script(seed=0)
print(f"script: {len(script)} control periods "
      f"({len(script) * 0.04:.1f} s of procedure time)")

session, report = run_replay(config, script)

# walk the trace and print each phase boundary
print("\nphase timeline:")
previous = None
for row in session.trace:
    if row.phase != previous:
        print(f"  t={row.t_s:6.2f} s  {row.phase}")
        previous = row.phase

print("\nhow the sampling went:")
print(f"  trace rows          {report.rows}")
print(f"  peak contact force  {report.max_normal_force_n:.3f} N")
print(f"  dwell on target     {report.dwell_s:.2f} s")
print(f"  sample collected    {report.success}")

# the same script and config always give the identical trace
again, _ = run_replay(config, script)
print(f"\nreplays deterministic: {again.trace == session.trace}")

# forces stay under the comfort budget thanks to the fixture; try pushing
# far past the surface with and without it
from opswab import overdrive_script
_, capped = run_replay(config, overdrive_script(vf_on=True))
_, uncapped = run_replay(config, overdrive_script(vf_on=False))
print(f"80 deep pushes, fixture on : peak {capped.max_normal_force_n:.3f} N")
print(f"80 deep pushes, fixture off: peak {uncapped.max_normal_force_n:.1f} N")
