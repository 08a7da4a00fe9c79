"""LV-grid PV/tariff simulation: python bindings over the C++ core."""

from ._core import (  # noqa: F401
    Bill,
    BatteryParams,
    CostModel,
    DesignOptions,
    DesignResult,
    DispatchResult,
    DispatchSeries,
    DurationCurve,
    LvGridError,
    NetworkModel,
    SystemDesign,
    TariffPolicy,
    YearCalendar,
    compute_bill,
    duration_curve,
    estimate_annual,
    generation_profile,
    irr,
    lcoe,
    make_fixture_files,
    make_tariff,
    npv,
    optimize_design,
    optimize_dispatch,
    parse_network,
    pv_penetration,
    roof_capacity,
    run_scenario_files,
    solve_snapshot,
    tariff_ids,
)

__all__ = [name for name in dir() if not name.startswith("_")]
