#include <peeltrace/address_type.hpp>

#include <array>

namespace peeltrace {

namespace {

constexpr std::array<std::string_view, kAddressTypeCount> kNames = {
    "p2pkh_compressed",
    "p2pkh_uncompressed",
    "wpkh_compressed",
    "wpkh_uncompressed",
    "multisig_2_2",
    "multisig_2_3",
    "multisig_3_4",
    "multisig_2_6",
    "wsh_multisig_2_2",
    "wsh_multisig_2_3",
};

} // namespace

std::string_view addressTypeName(AddressType type)
{
    return kNames[static_cast<std::size_t>(type)];
}

std::optional<AddressType> parseAddressType(std::string_view name)
{
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == name) {
            return static_cast<AddressType>(i);
        }
    }
    return std::nullopt;
}

} // namespace peeltrace
