#pragma once

#include <memory>

#include "macdoall/protocols/gilet.hpp"
#include "macdoall/protocols/groups_together.hpp"
#include "macdoall/protocols/grubtech.hpp"
#include "macdoall/protocols/robal.hpp"
#include "macdoall/protocols/two_lists.hpp"
#include "macdoall/round.hpp"

namespace macdoall {

inline std::unique_ptr<Protocol> make_protocol(ProtocolKind kind, const ProtocolOptions& options = {}) {
  switch (kind) {
    case ProtocolKind::TwoLists: return std::make_unique<TwoLists>();
    case ProtocolKind::GroupsTogether: return std::make_unique<GroupsTogether>();
    case ProtocolKind::Robal: return std::make_unique<Robal>(options.robal_force_main_loop);
    case ProtocolKind::GrubTech: return std::make_unique<GrubTech>(options.echo);
    case ProtocolKind::Gilet: return std::make_unique<Gilet>();
  }
  throw ConfigInvalid("unknown protocol kind");
}

}  // namespace macdoall
