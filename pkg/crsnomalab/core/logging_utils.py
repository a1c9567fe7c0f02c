from crsnomalab.core import logger


def _fmt(value):
    if value is None:
        return '-'
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def log_table(title, columns, rows):
    """
    Logs rows as a fixed-width debug table under `title`.

    Args:
        title (str): Heading line.
        columns (Sequence[str]): Column names.
        rows (Iterable[Sequence]): One sequence of values per row.
    """
    rendered = [[_fmt(v) for v in row] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in rendered]) for i, c in enumerate(columns)]
    logger.debug(f"{title} ({len(rendered)} rows)")
    logger.debug("  " + " | ".join(c.ljust(w) for c, w in zip(columns, widths)))
    logger.debug("  " + "-+-".join("-" * w for w in widths))
    for row in rendered:
        logger.debug("  " + " | ".join(v.rjust(w) for v, w in zip(row, widths)))


def log_system_config(cfg):
    logger.debug(f"[SystemConfig] combiner={cfg.combiner.value}, N_r={cfg.n_r}, N_d={cfg.n_d}, "
                 f"a2={cfg.a2:g}, R={cfg.target_rate:g}")
    log_table("[SystemConfig] links", ('link', 'm', 'omega'),
              [('S->R', cfg.sr.m, cfg.sr.omega), ('S->D', cfg.sd.m, cfg.sd.omega), ('R->D', cfg.rd.m, cfg.rd.omega)])


def log_expansion_terms(terms, title="[Series] expansion terms"):
    log_table(title, ('ks', 'coeff', 'exponent', 'decay'),
              [(getattr(t, 'ks', ''), t.coeff, t.exponent, t.decay) for t in terms])


def log_a2_trace(rows, rho_db=None):
    title = "[PowerOpt] a2 trace" if rho_db is None else f"[PowerOpt] a2 trace at {rho_db:g} dB"
    log_table(title, ('a2', 'delta1', 'delta2', 'ccdf_sd', 'ccdf_sr', 'product', 'outage'),
              [(r.a2, r.delta1, r.delta2, r.ccdf_sd, r.ccdf_sr, r.product, r.outage) for r in rows])
