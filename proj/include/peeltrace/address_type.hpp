#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace peeltrace {

// The ten script categories observed across clusters. The ledger format
// carries these as strings; anything else is rejected at ingest.
enum class AddressType : std::uint8_t {
    p2pkh_compressed,
    p2pkh_uncompressed,
    wpkh_compressed,
    wpkh_uncompressed,
    multisig_2_2,
    multisig_2_3,
    multisig_3_4,
    multisig_2_6,
    wsh_multisig_2_2,
    wsh_multisig_2_3,
};

inline constexpr std::size_t kAddressTypeCount = 10;

std::string_view addressTypeName(AddressType type);
std::optional<AddressType> parseAddressType(std::string_view name);

} // namespace peeltrace
