"""Machine check of path families and the spectral lower bound they certify."""

import asyncio
import logging
from typing import Iterable, Optional

import networkx as nx
import numpy as np

from ..config import app_config
from ..exceptions import PathCertificateError
from ..models.graphs import LabGraph, PathFamily, SignedFunction
from ..models.reports import CertifiedBound, ConditionCheck
from .graph_service import GraphService
from .path_service import PathService

logger = logging.getLogger(__name__)


class CertificateService:
    """Service verifying the four path conditions and computing certified bounds."""

    @staticmethod
    def lower_bound(T: int, B: int, E: float = 1.0) -> float:
        """2E / ((2T + 1)(2B + 1))."""
        return 2.0 * E / ((2 * T + 1) * (2 * B + 1))

    @staticmethod
    def check_identity_start(pf: PathFamily) -> ConditionCheck:
        """Every path starts at its own vertex."""
        wrong = np.flatnonzero(pf.table[0] != np.arange(pf.table.shape[1]))
        witness = None if wrong.size == 0 else f"vertex {pf.vertices[wrong[0]]} starts elsewhere"
        return ConditionCheck(name="identity-start", passed=wrong.size == 0, witness=witness)

    @staticmethod
    def check_steps(g: LabGraph, pf: PathFamily) -> ConditionCheck:
        """Each step stays put or crosses one edge."""
        n = pf.table.shape[1]
        index = g.index
        edges = np.array([(index[u], index[v]) for u, v in g.graph.edges], dtype=np.int64).reshape(-1, 2)
        codes = np.concatenate([edges[:, 0] * n + edges[:, 1], edges[:, 1] * n + edges[:, 0]])
        src, dst = pf.table[:-1], pf.table[1:]
        moving = src != dst
        legal = np.isin(src * n + dst, codes)
        bad = np.argwhere(moving & ~legal)
        if bad.size == 0:
            return ConditionCheck(name="edge-steps", passed=True)
        t, start = (int(x) for x in bad[0])
        witness = (f"path of {pf.vertices[start]} jumps {pf.vertices[src[t, start]]} -> "
                   f"{pf.vertices[dst[t, start]]} at t={t}")
        return ConditionCheck(name="edge-steps", passed=False, witness=witness)

    @staticmethod
    def check_bijection(pf: PathFamily) -> ConditionCheck:
        """The final snapshot visits every vertex once."""
        final = pf.table[-1]
        values, counts = np.unique(final, return_counts=True)
        if values.size == final.size:
            return ConditionCheck(name="final-bijection", passed=True)
        crowded = pf.vertices[int(values[np.argmax(counts)])]
        return ConditionCheck(name="final-bijection", passed=False,
                              witness=f"{int(counts.max())} paths end at {crowded}")

    @staticmethod
    def check_pairing(g: LabGraph, phi: SignedFunction, pf: PathFamily) -> ConditionCheck:
        """Adjacent start pairs can be matched so that their endpoints carry opposite labels."""
        final = pf.table[-1]
        labels = phi.labels
        index = g.index
        qualifying = nx.Graph()
        qualifying.add_nodes_from(range(g.order))
        for u, v in g.graph.edges:
            i, j = index[u], index[v]
            if labels[final[i]] != labels[final[j]]:
                qualifying.add_edge(i, j)
        matching = nx.max_weight_matching(qualifying, maxcardinality=True)
        if 2 * len(matching) == g.order:
            return ConditionCheck(name="opposite-pairing", passed=True)
        matched = {k for pair in matching for k in pair}
        lonely = next(k for k in range(g.order) if k not in matched)
        return ConditionCheck(name="opposite-pairing", passed=False,
                              witness=f"{len(matching)} of {g.order // 2} pairs; {pf.vertices[lonely]} unmatched")

    @staticmethod
    def certify_path(g: LabGraph, phi: SignedFunction, pf: PathFamily, E: float = 1.0,
                     include_paths: bool = False) -> CertifiedBound:
        """Verify the family against phi and return the certified lower bound on E_phi."""
        if g.order % 2:
            raise PathCertificateError(f"graph has an odd number of vertices ({g.order})")
        if tuple(phi.vertices) != tuple(g.vertices) or tuple(pf.vertices) != tuple(g.vertices):
            raise PathCertificateError("function, family and graph disagree on the vertex set")

        conditions = [
            CertificateService.check_identity_start(pf),
            CertificateService.check_steps(g, pf),
            CertificateService.check_bijection(pf),
        ]
        if conditions[-1].passed:
            conditions.append(CertificateService.check_pairing(g, phi, pf))
        else:
            conditions.append(ConditionCheck(name="opposite-pairing", passed=False,
                                             witness="final snapshot is not a bijection"))
        valid = all(c.passed for c in conditions)

        T, B = pf.horizon, pf.congestion
        cap = pf.congestion_cap
        if cap is not None and B > cap:
            logger.warning("congestion %d exceeds the declared cap %d; certifying with %d", B, cap, B)
            conditions.append(ConditionCheck(name="congestion-cap", passed=False,
                                             witness=f"B={B} > {cap}"))
            cap = B
        elif cap is not None:
            conditions.append(ConditionCheck(name="congestion-cap", passed=True))
        effective = B if cap is None else cap

        for check in conditions:
            if not check.passed:
                logger.warning("condition %s failed: %s", check.name, check.witness)
        rayleigh = GraphService.rayleigh(g, phi.values, E) if np.any(phi.values) else None
        result = CertifiedBound(
            graph=g.spec(),
            vertices=g.order,
            horizon=T,
            congestion=B,
            congestion_cap=pf.congestion_cap,
            bound=CertificateService.lower_bound(T, effective, E) if valid else 0.0,
            sharp_bound=CertificateService.lower_bound(T, B, E) if valid else 0.0,
            E=E,
            valid=valid,
            conditions=conditions,
            rayleigh=rayleigh,
            paths=pf.rows() if include_paths else None,
        )
        logger.info("certificate on %s: T=%d B=%d bound=%.6g valid=%s", g.kind, T, B, result.bound, valid)
        return result

    @staticmethod
    def certify(g: LabGraph, phi: SignedFunction, E: float = 1.0, include_paths: bool = False) -> CertifiedBound:
        """Construct the family for the graph kind, then certify it."""
        pf = PathService.construct(g, phi)
        return CertificateService.certify_path(g, phi, pf, E, include_paths)

    @staticmethod
    def random_signed_function(g: LabGraph, rng: np.random.Generator) -> SignedFunction:
        """Balanced +-1 function with a random sign pattern."""
        values = np.array([1.0] * (g.order // 2) + [-1.0] * (g.order // 2))
        rng.shuffle(values)
        return SignedFunction(tuple(g.vertices), values)

    @staticmethod
    async def certify_many_async(g: LabGraph, functions: Iterable[SignedFunction], E: float = 1.0,
                                 threads: Optional[int] = None) -> list[CertifiedBound]:
        """Certify several functions concurrently on worker threads."""
        semaphore = asyncio.Semaphore(threads or app_config.threads)

        async def _one(phi: SignedFunction) -> CertifiedBound:
            async with semaphore:
                return await asyncio.to_thread(CertificateService.certify, g, phi, E)

        return list(await asyncio.gather(*(_one(phi) for phi in functions)))
