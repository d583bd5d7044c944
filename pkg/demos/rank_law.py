"""Rank of the indirect-control block matrix against Nd - d(d+1)/2.

Run: python3 demos/rank_law.py
"""

from zcontrol import min_agents
from zcontrol.runner import rank_table

for N, d, Nd, rank, expected in rank_table(40, [1, 2, 3, 5, 8], seed=3):
    print(f"N={N:3d} d={d:2d} Nd={Nd:4d} rank={rank:4d} law={expected:4d} "
          f"min agents for d: {min_agents(d)}")
