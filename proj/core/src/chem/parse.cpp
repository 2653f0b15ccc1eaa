//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "hemgen/chem/element.h"
#include "hemgen/chem/smiles.h"
#include "hemgen/error.h"

namespace hemgen::chem {
namespace {

struct PendingBond {
  BondOrder order;
  char stereo;
  std::size_t pos;
};

struct OpenRing {
  int atom;
  std::optional<PendingBond> bond;
  std::size_t pos;
};

bool is_digit(char c) {
  return std::isdigit(static_cast<unsigned char>(c)) != 0;
}

class Parser {
public:
  explicit Parser(std::string_view s): s_(s) { }

  MolGraph run(ParseInfo *info) {
    if (s_.empty())
      throw Error(Errc::kEmptyInput, "empty SMILES");
    for (std::size_t i = 0; i < s_.size(); ++i)
      if (static_cast<unsigned char>(s_[i]) > 0x7f)
        throw Error(Errc::kNonAsciiInput, "non-ASCII byte", i);

    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      switch (c) {
      case '(':
        open_branch();
        break;
      case ')':
        close_branch();
        break;
      case '-': case '=': case '#': case ':': case '/': case '\\':
        bond_symbol(c);
        break;
      case '.':
        if (pending_)
          throw Error(Errc::kDanglingBondSymbol, "bond before '.'",
                      pending_->pos);
        if (!branches_.empty())
          throw Error(Errc::kUnbalancedParenthesis, "'.' inside a branch",
                      pos_);
        if (prev_ < 0)
          throw Error(Errc::kUnexpectedCharacter, "'.' without atom", pos_);
        prev_ = -1;
        ++pos_;
        break;
      case '%':
        if (pos_ + 2 >= s_.size() || !is_digit(s_[pos_ + 1])
            || !is_digit(s_[pos_ + 2]))
          throw Error(Errc::kUnexpectedCharacter, "malformed '%nn'", pos_);
        ring_bond((s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0'), 3);
        break;
      case '[':
        bracket_atom();
        break;
      default:
        if (is_digit(c))
          ring_bond(c - '0', 1);
        else
          organic_atom();
        break;
      }
    }

    if (pending_)
      throw Error(Errc::kDanglingBondSymbol, "bond at end of input",
                  pending_->pos);
    if (!branches_.empty())
      throw Error(Errc::kUnbalancedParenthesis, "unclosed branch",
                  branch_pos_.back());
    if (!rings_.empty())
      throw Error(Errc::kUnclosedRingBond,
                  "ring bond " + std::to_string(rings_.begin()->first)
                      + " never closed",
                  rings_.begin()->second.pos);
    if (atoms_.empty())
      throw Error(Errc::kEmptyInput, "no atoms");

    // Implicit hydrogens need the final bonding, so build once without them
    // and rebuild.
    MolGraph bare(atoms_, bonds_);
    for (int i = 0; i < bare.atom_count(); ++i)
      if (!atoms_[i].bracket)
        atoms_[i].hydrogens = implicit_hydrogens(bare, i);

    if (info != nullptr)
      info->ring_closures = ring_closures_;
    return MolGraph(std::move(atoms_), std::move(bonds_));
  }

private:
  void add_atom(Atom atom, std::size_t at) {
    const int idx = static_cast<int>(atoms_.size());
    atoms_.push_back(atom);
    if (prev_ >= 0) {
      add_bond(prev_, idx, pending_, at);
    } else if (pending_) {
      throw Error(Errc::kDanglingBondSymbol, "bond without preceding atom",
                  pending_->pos);
    }
    pending_.reset();
    prev_ = idx;
  }

  void add_bond(int a, int b, const std::optional<PendingBond> &pb,
                std::size_t at) {
    for (const Bond &e: bonds_)
      if ((e.a == a && e.b == b) || (e.a == b && e.b == a))
        throw Error(Errc::kDuplicateBond, "atoms bonded twice", at);
    Bond bond;
    bond.a = a;
    bond.b = b;
    if (pb) {
      bond.order = pb->order;
      bond.stereo = pb->stereo;
    } else {
      bond.order = atoms_[a].aromatic && atoms_[b].aromatic
                       ? BondOrder::kAromatic
                       : BondOrder::kSingle;
    }
    bonds_.push_back(bond);
  }

  void open_branch() {
    if (prev_ < 0)
      throw Error(Errc::kUnbalancedParenthesis, "branch without atom", pos_);
    if (pending_)
      throw Error(Errc::kDanglingBondSymbol, "bond before '('",
                  pending_->pos);
    if (pos_ + 1 < s_.size() && s_[pos_ + 1] == ')')
      throw Error(Errc::kUnbalancedParenthesis, "empty branch", pos_);
    branches_.push_back(prev_);
    branch_pos_.push_back(pos_);
    ++pos_;
  }

  void close_branch() {
    if (branches_.empty())
      throw Error(Errc::kUnbalancedParenthesis, "unmatched ')'", pos_);
    if (pending_)
      throw Error(Errc::kDanglingBondSymbol, "bond before ')'",
                  pending_->pos);
    prev_ = branches_.back();
    branches_.pop_back();
    branch_pos_.pop_back();
    ++pos_;
  }

  void bond_symbol(char c) {
    if (pending_)
      throw Error(Errc::kDanglingBondSymbol, "consecutive bond symbols", pos_);
    if (prev_ < 0)
      throw Error(Errc::kDanglingBondSymbol, "bond without preceding atom",
                  pos_);
    PendingBond pb { BondOrder::kSingle, '\0', pos_ };
    switch (c) {
    case '=': pb.order = BondOrder::kDouble; break;
    case '#': pb.order = BondOrder::kTriple; break;
    case ':': pb.order = BondOrder::kAromatic; break;
    case '/': case '\\': pb.stereo = c; break;
    default: break;
    }
    pending_ = pb;
    ++pos_;
  }

  void ring_bond(int number, std::size_t width) {
    if (prev_ < 0)
      throw Error(Errc::kUnexpectedCharacter, "ring bond without atom", pos_);
    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_.emplace(number, OpenRing { prev_, pending_, pos_ });
    } else {
      const OpenRing open = it->second;
      rings_.erase(it);
      std::optional<PendingBond> bond = open.bond;
      if (pending_) {
        if (bond && (bond->order != pending_->order))
          throw Error(Errc::kConflictingRingBond,
                      "ring bond symbols disagree", pos_);
        if (!bond || pending_->stereo != '\0')
          bond = pending_;
      }
      if (open.atom == prev_)
        throw Error(Errc::kDuplicateBond, "ring bond to itself", pos_);
      add_bond(open.atom, prev_, bond, pos_);
      ++ring_closures_;
    }
    pending_.reset();
    pos_ += width;
  }

  void organic_atom() {
    const std::size_t at = pos_;
    const char c = s_[pos_];
    const char next = pos_ + 1 < s_.size() ? s_[pos_ + 1] : '\0';
    std::string_view sym;
    bool aromatic = false;
    if (c == 'C' && next == 'l') {
      sym = "Cl";
    } else if (c == 'B' && next == 'r') {
      sym = "Br";
    } else {
      switch (c) {
      case 'B': sym = "B"; break;
      case 'C': sym = "C"; break;
      case 'N': sym = "N"; break;
      case 'O': sym = "O"; break;
      case 'P': sym = "P"; break;
      case 'S': sym = "S"; break;
      case 'F': sym = "F"; break;
      case 'I': sym = "I"; break;
      case 'b': sym = "B"; aromatic = true; break;
      case 'c': sym = "C"; aromatic = true; break;
      case 'n': sym = "N"; aromatic = true; break;
      case 'o': sym = "O"; aromatic = true; break;
      case 'p': sym = "P"; aromatic = true; break;
      case 's': sym = "S"; aromatic = true; break;
      default:
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '*')
          throw Error(Errc::kUnknownAtomSymbol,
                      std::string("unsupported atom '") + c + "'", at);
        throw Error(Errc::kUnexpectedCharacter,
                    std::string("unexpected '") + c + "'", at);
      }
    }
    pos_ += sym.size() == 2 ? 2 : 1;
    Atom atom;
    atom.atomic_number = find_element(sym)->atomic_number;
    atom.aromatic = aromatic;
    add_atom(atom, at);
  }

  void bracket_atom() {
    const std::size_t at = pos_;
    auto fail = [&](const char *why) {
      throw Error(Errc::kMalformedBracketAtom, why, at);
    };
    ++pos_;
    Atom atom;
    atom.bracket = true;

    if (pos_ < s_.size() && is_digit(s_[pos_])) {
      int iso = 0;
      while (pos_ < s_.size() && is_digit(s_[pos_])) {
        iso = iso * 10 + (s_[pos_] - '0');
        if (iso > 999)
          fail("isotope too large");
        ++pos_;
      }
      atom.isotope = iso;
    }

    if (pos_ >= s_.size())
      fail("unterminated bracket atom");
    const char c = s_[pos_];
    const char next = pos_ + 1 < s_.size() ? s_[pos_ + 1] : '\0';
    const Element *elem = nullptr;
    if (std::isupper(static_cast<unsigned char>(c))) {
      if (std::islower(static_cast<unsigned char>(next))) {
        elem = find_element(s_.substr(pos_, 2));
        if (elem != nullptr)
          pos_ += 2;
      }
      if (elem == nullptr) {
        elem = find_element(s_.substr(pos_, 1));
        if (elem == nullptr)
          throw Error(Errc::kUnknownAtomSymbol, "unknown element", pos_);
        ++pos_;
      }
    } else if (std::islower(static_cast<unsigned char>(c))) {
      std::string upper(1, static_cast<char>(std::toupper(c)));
      if ((c == 's' && next == 'e') || (c == 'a' && next == 's')) {
        upper += next;
        pos_ += 2;
      } else {
        ++pos_;
      }
      elem = find_element(upper);
      if (elem == nullptr || !is_aromatic_capable(elem->atomic_number))
        throw Error(Errc::kUnknownAtomSymbol, "unknown aromatic element",
                    at);
      atom.aromatic = true;
    } else if (c == '*') {
      throw Error(Errc::kUnknownAtomSymbol, "wildcard atom", pos_);
    } else {
      fail("missing element symbol");
    }
    atom.atomic_number = elem->atomic_number;

    // chirality is accepted and dropped
    while (pos_ < s_.size() && s_[pos_] == '@')
      ++pos_;

    if (pos_ < s_.size() && s_[pos_] == 'H') {
      ++pos_;
      int h = 1;
      if (pos_ < s_.size() && is_digit(s_[pos_])) {
        h = s_[pos_] - '0';
        ++pos_;
      }
      atom.hydrogens = h;
    }

    if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
      const char sign = s_[pos_];
      const int unit = sign == '+' ? 1 : -1;
      ++pos_;
      int magnitude = 1;
      if (pos_ < s_.size() && is_digit(s_[pos_])) {
        magnitude = s_[pos_] - '0';
        ++pos_;
      } else {
        while (pos_ < s_.size() && s_[pos_] == sign) {
          ++magnitude;
          ++pos_;
        }
      }
      atom.charge = unit * magnitude;
    }

    if (pos_ < s_.size() && s_[pos_] == ':') {
      ++pos_;
      if (pos_ >= s_.size() || !is_digit(s_[pos_]))
        fail("malformed atom class");
      while (pos_ < s_.size() && is_digit(s_[pos_]))
        ++pos_;
    }

    if (pos_ >= s_.size() || s_[pos_] != ']')
      fail("expected ']'");
    ++pos_;
    add_atom(atom, at);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  int prev_ = -1;
  std::optional<PendingBond> pending_;
  std::vector<int> branches_;
  std::vector<std::size_t> branch_pos_;
  std::map<int, OpenRing> rings_;
  int ring_closures_ = 0;
};

int integer_bond_sum(const MolGraph &g, int atom, int *aromatic_bonds,
                     bool *exocyclic_double) {
  int sum = 0;
  int arom = 0;
  bool exo = false;
  for (const Neighbor &nb: g.neighbors(atom)) {
    const BondOrder order = g.bond(nb.bond).order;
    if (order == BondOrder::kAromatic) {
      ++arom;
      ++sum;
    } else {
      sum += static_cast<int>(order);
      if (order == BondOrder::kDouble && !g.atom(nb.atom).aromatic)
        exo = true;
    }
  }
  if (aromatic_bonds != nullptr)
    *aromatic_bonds = arom;
  if (exocyclic_double != nullptr)
    *exocyclic_double = exo;
  return sum;
}

}  // namespace

MolGraph parse(std::string_view smiles, ParseInfo *info) {
  return Parser(smiles).run(info);
}

int implicit_hydrogens(const MolGraph &g, int atom) {
  const Atom &a = g.atom(atom);
  const ValenceList allowed = allowed_valences(a.atomic_number, a.charge);
  if (allowed.empty())
    return 0;
  const int sum = integer_bond_sum(g, atom, nullptr, nullptr);
  if (a.aromatic) {
    // one extra unit for the ring pi contribution; lowest valence only
    const int h = allowed.values[0] - (sum + 1);
    return h > 0 ? h : 0;
  }
  for (const std::uint8_t v: allowed.view())
    if (v >= sum)
      return v - sum;
  return 0;
}

std::vector<int> valence_violations(const MolGraph &g) {
  std::vector<int> bad;
  for (int i = 0; i < g.atom_count(); ++i) {
    const Atom &a = g.atom(i);
    const ValenceList allowed = allowed_valences(a.atomic_number, a.charge);
    if (allowed.empty()) {
      // no valence rule: only isolated bare atoms/ions are acceptable
      if (g.degree(i) != 0 || a.hydrogens != 0 || a.aromatic)
        bad.push_back(i);
      continue;
    }

    int aromatic_bonds = 0;
    bool exocyclic_double = false;
    const int sum = integer_bond_sum(g, i, &aromatic_bonds, &exocyclic_double)
                    + a.hydrogens;
    bool ok;
    if (a.aromatic) {
      bool ring_ok = g.atom_in_ring(i) && aromatic_bonds >= 2;
      for (const Neighbor &nb: g.neighbors(i))
        if (g.bond(nb.bond).order == BondOrder::kAromatic
            && !g.bond_in_ring(nb.bond))
          ring_ok = false;
      const bool donor_ok = a.atomic_number != 6 && a.atomic_number != 5;
      const bool without_pi = allowed.contains(sum)
                              && (donor_ok || a.charge != 0
                                  || exocyclic_double);
      ok = ring_ok && (allowed.contains(sum + 1) || without_pi);
    } else {
      bool fractional = false;
      for (const Neighbor &nb: g.neighbors(i))
        if (g.bond(nb.bond).order == BondOrder::kAromatic)
          fractional = true;
      ok = !fractional && allowed.contains(sum);
    }
    if (!ok)
      bad.push_back(i);
  }
  return bad;
}

bool has_valid_valences(const MolGraph &g) {
  return valence_violations(g).empty();
}

bool is_valid(std::string_view smiles) noexcept {
  try {
    return has_valid_valences(parse(smiles));
  } catch (...) {
    return false;
  }
}

}  // namespace hemgen::chem
