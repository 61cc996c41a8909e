#pragma once

#include <string>
#include <string_view>

#include "pvfair/netmodel/network.hpp"

namespace pvfair::netmodel {

/// Parses the matrix-style case layout (`mpc.baseMVA`, `mpc.bus`,
/// `mpc.branch`). The result is in per-unit on the file's bases.
///
/// Unit annotations on the opening line of a table are honoured the way the
/// distribution cases in the reference collection use them: a bus table
/// tagged "kW" holds loads in kW/kVAr, a branch table tagged "ohms" holds
/// impedances in ohms (base impedance from the first bus' baseKV). A bus
/// table tagged "per-unit" is read without any scaling; otherwise loads are
/// in MW/MVAr. The trailing conversion code of such files is not executed.
///
/// Bus type 3 marks slack buses. The branch status column is kept in
/// Line::closed_in_case but never decides the optimized topology.
///
/// Throws ParseError (with line and column) on a missing table, a
/// non-numeric field, a short row, or a branch that references an unknown
/// bus.
Network parse_case(std::string_view text);

/// Reads and parses a case file; the network name defaults to the file stem.
Network load_case_file(const std::string& path);

/// Writes `net` in the same layout, loads and impedances in per-unit, so that
/// parse_case(write_case(net)) reproduces every parsed field exactly.
std::string write_case(const Network& net);

}  // namespace pvfair::netmodel
